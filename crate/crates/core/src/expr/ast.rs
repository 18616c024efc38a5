use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMat, ONE};

/// Noncommutative expression tree. Variables are zero-based (`x1` is `Var(0)`).
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Matrix(CMat),
    Var(usize),
    Adjoint(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    ScalarMul(Complex64, Box<Expr>),
    Pow(Box<Expr>, u32),
    Inv(Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    RealPart(Box<Expr>),
}

use Expr::*;

impl Expr {
    pub fn var(i: usize) -> Expr {
        Var(i)
    }

    pub fn constant(re: f64) -> Expr {
        Const(Complex64::new(re, 0.0))
    }

    pub fn adjoint(self) -> Expr {
        Adjoint(Box::new(self))
    }

    pub fn add(self, o: Expr) -> Expr {
        Add(Box::new(self), Box::new(o))
    }

    pub fn sub(self, o: Expr) -> Expr {
        Sub(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Expr {
        Mul(Box::new(self), Box::new(o))
    }

    pub fn scale(self, c: Complex64) -> Expr {
        ScalarMul(c, Box::new(self))
    }

    pub fn pow(self, n: u32) -> Expr {
        Pow(Box::new(self), n)
    }

    pub fn inv(self) -> Expr {
        Inv(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Exp(Box::new(self))
    }

    pub fn log(self) -> Expr {
        Log(Box::new(self))
    }

    pub fn re(self) -> Expr {
        RealPart(Box::new(self))
    }

    fn children(&self) -> Vec<&Expr> {
        match self {
            Const(_) | Matrix(_) | Var(_) => vec![],
            Adjoint(a) | ScalarMul(_, a) | Pow(a, _) | Inv(a) | Exp(a) | Log(a) | RealPart(a) => {
                vec![a]
            }
            Add(a, b) | Sub(a, b) | Mul(a, b) => vec![a, b],
        }
    }

    /// Number of variables referenced (largest index plus one).
    pub fn nvars(&self) -> usize {
        match self {
            Var(i) => i + 1,
            _ => self.children().into_iter().map(Expr::nvars).max().unwrap_or(0),
        }
    }

    /// True when no adjoint or real part occurs.
    pub fn is_analytic(&self) -> bool {
        match self {
            Adjoint(_) | RealPart(_) => false,
            _ => self.children().into_iter().all(Expr::is_analytic),
        }
    }

    /// Coefficient size implied by matrix constants (1 when there are none).
    pub fn coeff_size(&self) -> Result<usize> {
        let mut k: Option<usize> = None;
        self.visit(&mut |e| {
            if let Matrix(m) = e {
                if !m.is_square() {
                    return Err(Error::DimensionMismatch("matrix constant must be square".into()));
                }
                match k {
                    None => k = Some(m.nrows()),
                    Some(k0) if k0 != m.nrows() => {
                        return Err(Error::DimensionMismatch(format!(
                            "matrix constants of sizes {k0} and {}",
                            m.nrows()
                        )))
                    }
                    _ => {}
                }
            }
            Ok(())
        })?;
        Ok(k.unwrap_or(1))
    }

    fn visit(&self, f: &mut impl FnMut(&Expr) -> Result<()>) -> Result<()> {
        f(self)?;
        for c in self.children() {
            c.visit(f)?;
        }
        Ok(())
    }

    /// Rewrites `Sub` and `Pow` into `Add`, `ScalarMul` and `Mul`.
    pub fn normalize(&self) -> Expr {
        match self {
            Const(_) | Matrix(_) | Var(_) => self.clone(),
            Sub(a, b) => a.normalize().add(b.normalize().scale(-ONE)),
            Pow(a, n) => {
                let base = a.normalize();
                if *n == 0 {
                    return Const(ONE);
                }
                let mut acc = base.clone();
                for _ in 1..*n {
                    acc = acc.mul(base.clone());
                }
                acc
            }
            Adjoint(a) => a.normalize().adjoint(),
            Add(a, b) => a.normalize().add(b.normalize()),
            Mul(a, b) => a.normalize().mul(b.normalize()),
            ScalarMul(c, a) => a.normalize().scale(*c),
            Inv(a) => a.normalize().inv(),
            Exp(a) => a.normalize().exp(),
            Log(a) => a.normalize().log(),
            RealPart(a) => a.normalize().re(),
        }
    }

    /// Value of a variable-free scalar subtree.
    pub fn const_value(&self) -> Option<Complex64> {
        match self {
            Const(c) => Some(*c),
            Add(a, b) => Some(a.const_value()? + b.const_value()?),
            Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            Mul(a, b) => Some(a.const_value()? * b.const_value()?),
            ScalarMul(c, a) => Some(c * a.const_value()?),
            Pow(a, n) => Some(a.const_value()?.powu(*n)),
            _ => None,
        }
    }
}

fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// Prints a constant; the flag reports whether it needs parentheses as a factor.
fn fmt_const(z: Complex64) -> (String, bool) {
    if z.im == 0.0 {
        (fmt_real(z.re), z.re < 0.0)
    } else if z.re == 0.0 {
        (format!("{}i", fmt_real(z.im)), z.im < 0.0)
    } else {
        let sign = if z.im < 0.0 { "-" } else { "+" };
        (format!("{}{sign}{}i", fmt_real(z.re), fmt_real(z.im.abs())), true)
    }
}

fn const_atom(z: Complex64) -> String {
    match fmt_const(z) {
        (s, true) => format!("({s})"),
        (s, false) => s,
    }
}

fn is_atom(e: &Expr) -> bool {
    match e {
        Var(_) | Inv(_) | Exp(_) | Log(_) | RealPart(_) => true,
        Const(z) => !fmt_const(*z).1,
        _ => false,
    }
}

struct Atom<'a>(&'a Expr);
struct Summand<'a>(&'a Expr);

impl fmt::Display for Summand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Add(..) | Sub(..) => write!(f, "({})", self.0),
            Const(z) => f.write_str(&const_atom(*z)),
            e => write!(f, "{e}"),
        }
    }
}
struct Factor<'a>(&'a Expr);

impl fmt::Display for Atom<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if is_atom(self.0) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

impl fmt::Display for Factor<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Pow(..) | Adjoint(_) => write!(f, "{}", self.0),
            e => write!(f, "{}", Atom(e)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Const(z) if z.re != 0.0 && z.im != 0.0 => f.write_str(&const_atom(*z)),
            Const(z) => f.write_str(&fmt_const(*z).0),
            Matrix(m) => write!(f, "<{}x{} matrix>", m.nrows(), m.ncols()),
            Var(i) => write!(f, "x{}", i + 1),
            Adjoint(a) => match a.as_ref() {
                Adjoint(_) | Pow(..) => write!(f, "{a}'"),
                _ => write!(f, "{}'", Atom(a)),
            },
            Add(a, b) => write!(f, "{a} + {}", Summand(b)),
            Sub(a, b) => write!(f, "{a} - {}", Summand(b)),
            Mul(a, b) => {
                match a.as_ref() {
                    Mul(..) => write!(f, "{a}")?,
                    _ => write!(f, "{}", Factor(a))?,
                }
                write!(f, " {}", Factor(b))
            }
            ScalarMul(z, a) => {
                write!(f, "{} ", const_atom(*z))?;
                match a.as_ref() {
                    Mul(..) | ScalarMul(..) => write!(f, "{a}"),
                    _ => write!(f, "{}", Factor(a)),
                }
            }
            Pow(a, n) => write!(f, "{}^{n}", Atom(a)),
            Inv(a) => write!(f, "inv({a})"),
            Exp(a) => write!(f, "exp({a})"),
            Log(a) => write!(f, "log({a})"),
            RealPart(a) => write!(f, "re({a})"),
        }
    }
}
