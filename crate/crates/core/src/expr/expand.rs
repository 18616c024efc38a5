//! Expansion of expressions into truncated power series about the origin.

use num_complex::Complex64;

use super::ast::Expr;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE};
use crate::series::NCSeries;
use crate::word::Letter;

/// Expands `e` over `nvars` variables, truncating at `maxdeg`.
///
/// `inv`, `exp` and `log` are expanded around the constant term `c₀` of their
/// argument: `inv` needs `c₀` invertible, `exp` and `log` need `c₀ = λ·1`
/// (and `λ` off the branch cut for `log`).
pub fn expand(e: &Expr, nvars: usize, maxdeg: usize) -> Result<NCSeries> {
    if e.nvars() > nvars {
        return Err(Error::DimensionMismatch(format!(
            "expression uses x{} but only {nvars} variables were declared",
            e.nvars()
        )));
    }
    let k = e.coeff_size()?;
    Expander { nvars, k, maxdeg }.go(&e.normalize())
}

struct Expander {
    nvars: usize,
    k: usize,
    maxdeg: usize,
}

/// Splits `s` into its constant term and the remainder, requiring the
/// constant to be a scalar multiple of the identity.
fn scalar_constant(s: &NCSeries, what: &str) -> Result<(Complex64, NCSeries)> {
    let c0 = s.constant_term();
    let lambda = c0[(0, 0)];
    let dev = (&c0 - linalg::eye(c0.nrows()).map(|z| z * lambda)).norm();
    if dev > 0.0 {
        return Err(Error::NotExpandable(format!(
            "{what}: constant term of the argument is not a multiple of the identity"
        )));
    }
    let q = s.filter(|w| !w.is_empty());
    Ok((lambda, q))
}

impl Expander {
    fn go(&self, e: &Expr) -> Result<NCSeries> {
        let (d, k, n) = (self.nvars, self.k, self.maxdeg);
        Ok(match e {
            Expr::Const(c) => NCSeries::scalar(d, k, *c, n),
            Expr::Matrix(m) => NCSeries::constant(d, m.clone(), n),
            Expr::Var(i) => NCSeries::letter(d, k, Letter::z(*i as u16), n),
            Expr::Adjoint(a) => self.go(a)?.adjoint(),
            Expr::Add(a, b) => self.go(a)?.add(&self.go(b)?)?,
            Expr::Sub(a, b) => self.go(a)?.sub(&self.go(b)?)?,
            Expr::Mul(a, b) => self.go(a)?.mul(&self.go(b)?)?,
            Expr::ScalarMul(c, a) => self.go(a)?.scale(*c),
            Expr::Pow(a, p) => self.go(a)?.pow(*p)?,
            Expr::RealPart(a) => self.go(a)?.real_part(),
            Expr::Inv(a) => {
                let s = self.go(a)?;
                let c0 = s.constant_term();
                let c0inv: CMat = linalg::inverse(&c0)
                    .map_err(|_| Error::NotExpandable("inv: constant term of the argument is singular".into()))?;
                // (c0 + q)⁻¹ = Σ (−c0⁻¹ q)^j c0⁻¹
                let q = s.filter(|w| !w.is_empty());
                let step = q.left_mul_const(&c0inv.map(|z| -z))?;
                let base = NCSeries::constant(d, c0inv, n);
                let mut power = base.clone();
                let mut acc = base;
                for _ in 0..n {
                    power = step.mul(&power)?;
                    if power.is_zero() {
                        break;
                    }
                    acc = acc.add(&power)?;
                }
                acc
            }
            Expr::Exp(a) => {
                let (lambda, q) = scalar_constant(&self.go(a)?, "exp")?;
                let mut term = NCSeries::one(d, k, n);
                let mut acc = term.clone();
                for j in 1..=n {
                    term = term.mul(&q)?.scale(linalg::re(1.0 / j as f64));
                    if term.is_zero() {
                        break;
                    }
                    acc = acc.add(&term)?;
                }
                acc.scale(lambda.exp())
            }
            Expr::Log(a) => {
                let (lambda, q) = scalar_constant(&self.go(a)?, "log")?;
                if lambda.im == 0.0 && lambda.re <= 0.0 {
                    return Err(Error::NotExpandable(format!(
                        "log: constant term {} lies on the branch cut",
                        lambda.re
                    )));
                }
                let r = q.scale(ONE / lambda);
                let mut power = NCSeries::one(d, k, n);
                let mut acc = NCSeries::scalar(d, k, lambda.ln(), n);
                for j in 1..=n {
                    power = power.mul(&r)?;
                    if power.is_zero() {
                        break;
                    }
                    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                    acc = acc.add(&power.scale(linalg::re(sign / j as f64)))?;
                }
                acc
            }
        })
    }
}
