//! Evaluation of series and expressions at matrix tuples.
//!
//! Layout: a coefficient `c` on word `w` contributes `X^w ⊗ c`; the word acts
//! on the left tensor factor and the coefficient on the right. With this
//! layout `eval(X ⊕ Y) = eval(X) ⊕ eval(Y)` holds literally.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::{self, CMat};
use crate::series::NCSeries;
use crate::tuple::MatrixTuple;
use crate::word::{Letter, Word};

/// Memoized word products `X^w` for a fixed tuple.
pub struct WordPowers<'a> {
    x: &'a MatrixTuple,
    adj: Vec<CMat>,
    cache: HashMap<Word, CMat>,
}

impl<'a> WordPowers<'a> {
    pub fn new(x: &'a MatrixTuple) -> Self {
        WordPowers { x, adj: x.mats().iter().map(|m| m.adjoint()).collect(), cache: HashMap::new() }
    }

    fn letter(&self, l: Letter) -> &CMat {
        if l.starred {
            &self.adj[l.var as usize]
        } else {
            self.x.get(l.var as usize)
        }
    }

    pub fn get(&mut self, w: &Word) -> CMat {
        if let Some(m) = self.cache.get(w) {
            return m.clone();
        }
        let letters = w.letters();
        let m = match letters.len() {
            0 => linalg::eye(self.x.n()),
            1 => self.letter(letters[0]).clone(),
            len => {
                let prefix = Word::new(letters[..len - 1].to_vec());
                let p = self.get(&prefix);
                p * self.letter(letters[len - 1])
            }
        };
        self.cache.insert(w.clone(), m.clone());
        m
    }
}

/// `Σ_w X^w ⊗ c_w`, an `(n·rows) × (n·cols)` matrix.
pub fn eval_series(s: &NCSeries, x: &MatrixTuple) -> Result<CMat> {
    if s.nvars() != x.d() {
        return Err(Error::DimensionMismatch(format!("series has d = {}, tuple has d = {}", s.nvars(), x.d())));
    }
    let n = x.n();
    let mut out = linalg::zeros(n * s.rows(), n * s.cols());
    let mut powers = WordPowers::new(x);
    for (w, c) in s.iter() {
        out += linalg::kron(&powers.get(w), c);
    }
    Ok(out)
}

/// Pointwise evaluation of an expression; the result is `(n·k) × (n·k)`.
pub fn eval_expr(e: &Expr, x: &MatrixTuple) -> Result<CMat> {
    if e.nvars() > x.d() {
        return Err(Error::DimensionMismatch(format!(
            "expression uses x{} but the tuple has d = {}",
            e.nvars(),
            x.d()
        )));
    }
    let k = e.coeff_size()?;
    Evaluator { x, k }.go(e)
}

struct Evaluator<'a> {
    x: &'a MatrixTuple,
    k: usize,
}

impl Evaluator<'_> {
    fn size(&self) -> usize {
        self.x.n() * self.k
    }

    fn go(&self, e: &Expr) -> Result<CMat> {
        let n = self.x.n();
        Ok(match e {
            Expr::Const(c) => linalg::eye(self.size()).map(|z| z * c),
            Expr::Matrix(m) => linalg::kron(&linalg::eye(n), m),
            Expr::Var(i) => linalg::kron(self.x.get(*i), &linalg::eye(self.k)),
            Expr::Adjoint(a) => self.go(a)?.adjoint(),
            Expr::Add(a, b) => self.go(a)? + self.go(b)?,
            Expr::Sub(a, b) => self.go(a)? - self.go(b)?,
            Expr::Mul(a, b) => self.go(a)? * self.go(b)?,
            Expr::ScalarMul(c, a) => self.go(a)?.map(|z| z * c),
            Expr::Pow(a, p) => {
                let base = self.go(a)?;
                base.pow(*p)
            }
            Expr::Inv(a) => linalg::inverse(&self.go(a)?)?,
            Expr::Exp(a) => linalg::matrix_exp(&self.go(a)?),
            Expr::Log(a) => linalg::principal_log(&self.go(a)?)?,
            Expr::RealPart(a) => linalg::hermitian_part(&self.go(a)?),
        })
    }
}
