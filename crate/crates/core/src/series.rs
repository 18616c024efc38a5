//! Truncated noncommutative power series with dense matrix coefficients.
//!
//! A series stores `Word -> coefficient` for words of length at most `maxdeg`.
//! Coefficients are `rows × cols`; ordinary (square, `k × k`) series have
//! `rows == cols == k`. Rectangular coefficients appear in realizations, where
//! `v⁺`, `v⁻` and `T` are series with operator-valued coefficients between
//! different spaces.
//!
//! Stored coefficients are never the exact zero matrix.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, ONE, ZERO};
use crate::word::{Letter, Word, WordKind};

#[derive(Clone, Debug, PartialEq)]
pub struct NCSeries {
    nvars: usize,
    rows: usize,
    cols: usize,
    maxdeg: usize,
    terms: BTreeMap<Word, CMat>,
}

fn is_exact_zero(m: &CMat) -> bool {
    m.iter().all(|z| *z == ZERO)
}

impl NCSeries {
    /// The zero series with `k × k` coefficients.
    pub fn zero(nvars: usize, k: usize, maxdeg: usize) -> Self {
        Self::zero_rect(nvars, k, k, maxdeg)
    }

    pub fn zero_rect(nvars: usize, rows: usize, cols: usize, maxdeg: usize) -> Self {
        NCSeries { nvars, rows, cols, maxdeg, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: CMat, maxdeg: usize) -> Self {
        let mut s = Self::zero_rect(nvars, c.nrows(), c.ncols(), maxdeg);
        s.add_term(Word::empty(), c);
        s
    }

    /// `λ·1` with `k × k` identity coefficient.
    pub fn scalar(nvars: usize, k: usize, lambda: Complex64, maxdeg: usize) -> Self {
        Self::constant(nvars, linalg::eye(k).map(|z| z * lambda), maxdeg)
    }

    pub fn one(nvars: usize, k: usize, maxdeg: usize) -> Self {
        Self::scalar(nvars, k, ONE, maxdeg)
    }

    pub fn monomial(nvars: usize, word: Word, coeff: CMat, maxdeg: usize) -> Self {
        let mut s = Self::zero_rect(nvars, coeff.nrows(), coeff.ncols(), maxdeg);
        s.add_term(word, coeff);
        s
    }

    /// The letter `z_{var+1}` (or its adjoint) with identity coefficient.
    pub fn letter(nvars: usize, k: usize, l: Letter, maxdeg: usize) -> Self {
        Self::monomial(nvars, Word::letter(l), linalg::eye(k), maxdeg)
    }

    /// Scalar (`k = 1`) series from `(word, coefficient)` pairs.
    pub fn from_scalar_terms<'a>(
        nvars: usize,
        maxdeg: usize,
        terms: impl IntoIterator<Item = (&'a str, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::zero(nvars, 1, maxdeg);
        for (w, c) in terms {
            let word: Word = w.parse()?;
            s.check_word(&word)?;
            s.add_term(word, CMat::from_element(1, 1, c));
        }
        Ok(s)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Coefficient size for square series.
    pub fn k(&self) -> usize {
        self.rows
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn maxdeg(&self) -> usize {
        self.maxdeg
    }

    pub fn terms(&self) -> &BTreeMap<Word, CMat> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CMat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, w: &Word) -> Option<&CMat> {
        self.terms.get(w)
    }

    /// Coefficient at `w`, zero when absent.
    pub fn coeff(&self, w: &Word) -> CMat {
        self.terms.get(w).cloned().unwrap_or_else(|| linalg::zeros(self.rows, self.cols))
    }

    pub fn constant_term(&self) -> CMat {
        self.coeff(&Word::empty())
    }

    /// Largest stored word length (0 for the zero series).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(Word::len).max().unwrap_or(0)
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.var_bound() > self.nvars {
            return Err(Error::InvalidWord(format!("{w} uses a variable beyond d = {}", self.nvars)));
        }
        Ok(())
    }

    /// Accumulates `c` into the coefficient at `w`. Words longer than `maxdeg`
    /// are discarded, exact-zero results are removed.
    pub fn add_term(&mut self, w: Word, c: CMat) {
        assert_eq!(c.shape(), (self.rows, self.cols), "coefficient shape");
        debug_assert!(w.var_bound() <= self.nvars, "word {w} exceeds d = {}", self.nvars);
        if w.len() > self.maxdeg {
            return;
        }
        match self.terms.entry(w) {
            std::collections::btree_map::Entry::Vacant(e) => {
                if !is_exact_zero(&c) {
                    e.insert(c);
                }
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if is_exact_zero(e.get()) {
                    e.remove();
                }
            }
        }
    }

    fn same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.nvars != other.nvars || self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{op}: (d={}, {}x{}) vs (d={}, {}x{})",
                self.nvars, self.rows, self.cols, other.nvars, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other, "series_add")?;
        let mut out = self.clone();
        out.maxdeg = self.maxdeg.min(other.maxdeg);
        out.terms.retain(|w, _| w.len() <= out.maxdeg);
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-ONE)
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        let mut out = Self::zero_rect(self.nvars, self.rows, self.cols, self.maxdeg);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c.map(|z| z * lambda));
        }
        out
    }

    /// `M · s` coefficientwise.
    pub fn left_mul_const(&self, m: &CMat) -> Result<Self> {
        if m.ncols() != self.rows {
            return Err(Error::DimensionMismatch("left_mul_const".into()));
        }
        let mut out = Self::zero_rect(self.nvars, m.nrows(), self.cols, self.maxdeg);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), m * c);
        }
        Ok(out)
    }

    /// `s · M` coefficientwise.
    pub fn right_mul_const(&self, m: &CMat) -> Result<Self> {
        if m.nrows() != self.cols {
            return Err(Error::DimensionMismatch("right_mul_const".into()));
        }
        let mut out = Self::zero_rect(self.nvars, self.rows, m.ncols(), self.maxdeg);
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * m);
        }
        Ok(out)
    }

    /// Cauchy product over word concatenation, truncated at the smaller `maxdeg`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.nvars != other.nvars || self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "series_mul: (d={}, {}x{}) · (d={}, {}x{})",
                self.nvars, self.rows, self.cols, other.nvars, other.rows, other.cols
            )));
        }
        let maxdeg = self.maxdeg.min(other.maxdeg);
        let mut acc: BTreeMap<Word, CMat> = BTreeMap::new();
        for (u, a) in &self.terms {
            if u.len() > maxdeg {
                continue;
            }
            for (v, b) in &other.terms {
                if u.len() + v.len() > maxdeg {
                    // terms are graded: every later v is at least as long
                    break;
                }
                let w = u.concat(v);
                match acc.get_mut(&w) {
                    Some(m) => m.gemm(ONE, a, b, ONE),
                    None => {
                        acc.insert(w, a * b);
                    }
                }
            }
        }
        acc.retain(|_, m| !is_exact_zero(m));
        Ok(NCSeries { nvars: self.nvars, rows: self.rows, cols: other.cols, maxdeg, terms: acc })
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("power of a rectangular series".into()));
        }
        let mut out = Self::one(self.nvars, self.rows, self.maxdeg);
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// `s*`: the coefficient at `w` is the adjoint of the coefficient at `w*`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero_rect(self.nvars, self.cols, self.rows, self.maxdeg);
        for (w, c) in &self.terms {
            out.terms.insert(w.involution(), c.adjoint());
        }
        out
    }

    /// `(s + s*)/2`.
    pub fn real_part(&self) -> Self {
        assert_eq!(self.rows, self.cols, "real part of a rectangular series");
        self.add(&self.adjoint()).expect("same shape").scale(linalg::re(0.5))
    }

    /// Largest coefficient deviation `‖c_w − (c_{w*})*‖_F`.
    pub fn self_adjoint_deviation(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        self.max_coeff_diff(&self.adjoint())
    }

    /// Largest Frobenius distance between corresponding coefficients.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut words: Vec<&Word> = self.terms.keys().chain(other.terms.keys()).collect();
        words.sort();
        words.dedup();
        words.into_iter().map(|w| (self.coeff(w) - other.coeff(w)).norm()).fold(0.0, f64::max)
    }

    pub fn filter(&self, keep: impl Fn(&Word) -> bool) -> Self {
        NCSeries {
            terms: self.terms.iter().filter(|(w, _)| keep(w)).map(|(w, c)| (w.clone(), c.clone())).collect(),
            ..self.clone_empty()
        }
    }

    fn clone_empty(&self) -> Self {
        Self::zero_rect(self.nvars, self.rows, self.cols, self.maxdeg)
    }

    /// Drops words longer than `deg` and lowers `maxdeg` accordingly.
    pub fn truncate(&self, deg: usize) -> Self {
        let mut out = self.filter(|w| w.len() <= deg);
        out.maxdeg = deg.min(self.maxdeg);
        out
    }

    /// Keeps words with length in `lo..=hi`.
    pub fn degree_filter(&self, lo: usize, hi: usize) -> Self {
        self.filter(|w| (lo..=hi).contains(&w.len()))
    }

    /// Analytic words of length ≥ 1.
    pub fn analytic_part(&self) -> Self {
        self.filter(|w| w.kind() == WordKind::Analytic)
    }

    /// Coanalytic words of length ≥ 1.
    pub fn coanalytic_part(&self) -> Self {
        self.filter(|w| w.kind() == WordKind::Coanalytic)
    }

    pub fn mixed_part(&self) -> Self {
        self.filter(|w| w.kind() == WordKind::Mixed)
    }

    /// Only unstarred letters appear (constant term allowed).
    pub fn is_analytic(&self) -> bool {
        self.terms.keys().all(Word::is_analytic)
    }

    /// Reinterprets the series over a larger alphabet.
    pub fn with_nvars(&self, nvars: usize) -> Result<Self> {
        if nvars < self.terms.keys().map(Word::var_bound).max().unwrap_or(0) {
            return Err(Error::DimensionMismatch("with_nvars would drop letters".into()));
        }
        let mut out = self.clone();
        out.nvars = nvars;
        Ok(out)
    }

    pub fn with_maxdeg(&self, maxdeg: usize) -> Self {
        let mut out = self.truncate(maxdeg);
        out.maxdeg = maxdeg;
        out
    }

    /// Translation by a scalar point: every letter `z_i` becomes `z_i + w_i`
    /// (and `z_i*` becomes `z_i* + conj(w_i)`).
    ///
    /// Only the stored terms are expanded, so coefficients of the result are
    /// exact for polynomials and truncation-accurate otherwise.
    pub fn translate(&self, w: &[Complex64]) -> Result<Self> {
        if w.len() != self.nvars {
            return Err(Error::DimensionMismatch(format!(
                "translation point has {} entries, series has d = {}",
                w.len(),
                self.nvars
            )));
        }
        let mut out = self.clone_empty();
        for (word, c) in &self.terms {
            let mut expansion: BTreeMap<Word, Complex64> = BTreeMap::new();
            expansion.insert(Word::empty(), ONE);
            for &l in word.letters() {
                let shift = if l.starred { w[l.var as usize].conj() } else { w[l.var as usize] };
                let mut next: BTreeMap<Word, Complex64> = BTreeMap::new();
                for (p, a) in expansion {
                    let mut q = p.clone();
                    q.push(l);
                    *next.entry(q).or_insert(ZERO) += a;
                    if shift != ZERO {
                        *next.entry(p).or_insert(ZERO) += a * shift;
                    }
                }
                expansion = next;
            }
            for (p, a) in expansion {
                if a != ZERO {
                    out.add_term(p, c.map(|z| z * a));
                }
            }
        }
        Ok(out)
    }

    /// Stacks coefficients vertically, `[a; b]`.
    pub fn vstack(a: &Self, b: &Self) -> Result<Self> {
        if a.nvars != b.nvars || a.cols != b.cols {
            return Err(Error::DimensionMismatch("vstack".into()));
        }
        Self::assemble(a, b, a.rows + b.rows, a.cols, (b.rows > 0).then_some((a.rows, 0)))
    }

    /// Stacks coefficients horizontally, `[a, b]`.
    pub fn hstack(a: &Self, b: &Self) -> Result<Self> {
        if a.nvars != b.nvars || a.rows != b.rows {
            return Err(Error::DimensionMismatch("hstack".into()));
        }
        Self::assemble(a, b, a.rows, a.cols + b.cols, (b.cols > 0).then_some((0, a.cols)))
    }

    fn assemble(a: &Self, b: &Self, rows: usize, cols: usize, b_at: Option<(usize, usize)>) -> Result<Self> {
        let maxdeg = a.maxdeg.min(b.maxdeg);
        let mut out = Self::zero_rect(a.nvars, rows, cols, maxdeg);
        for (w, c) in &a.terms {
            let mut m = linalg::zeros(rows, cols);
            m.view_mut((0, 0), c.shape()).copy_from(c);
            out.add_term(w.clone(), m);
        }
        if let Some(origin) = b_at {
            for (w, c) in &b.terms {
                let mut m = linalg::zeros(rows, cols);
                m.view_mut(origin, c.shape()).copy_from(c);
                out.add_term(w.clone(), m);
            }
        }
        Ok(out)
    }

    /// `[[a, b], [c, d]]`.
    pub fn block2(a: &Self, b: &Self, c: &Self, d: &Self) -> Result<Self> {
        Self::vstack(&Self::hstack(a, b)?, &Self::hstack(c, d)?)
    }

    /// `Σ_{j=0}^{maxdeg} s^j` for a square series without constant term.
    pub fn neumann(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("Neumann series of a rectangular series".into()));
        }
        if self.terms.contains_key(&Word::empty()) {
            return Err(Error::NotExpandable("Neumann series needs a vanishing constant term".into()));
        }
        let mut acc = Self::one(self.nvars, self.rows, self.maxdeg);
        let mut power = acc.clone();
        for _ in 0..self.maxdeg {
            power = power.mul(self)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            d: self.nvars,
            k: self.rows,
            cols: (self.cols != self.rows).then_some(self.cols),
            maxdeg: self.maxdeg,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| TermJson { word: w.to_string(), coeff: linalg::json::to_rows(c) })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let cols = j.cols.unwrap_or(j.k);
        let mut s = Self::zero_rect(j.d, j.k, cols, j.maxdeg);
        for t in &j.terms {
            let w: Word = t.word.parse()?;
            s.check_word(&w)?;
            if w.len() > j.maxdeg {
                return Err(Error::InvalidWord(format!("{w} is longer than maxdeg {}", j.maxdeg)));
            }
            let c = linalg::json::from_rows(&t.coeff)?;
            if c.shape() != (j.k, cols) {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient of `{w}` is {}x{}, expected {}x{}",
                    c.nrows(),
                    c.ncols(),
                    j.k,
                    cols
                )));
            }
            s.add_term(w, c);
        }
        Ok(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("series serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermJson {
    pub word: String,
    pub coeff: linalg::json::Rows,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesJson {
    pub d: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub maxdeg: usize,
    pub terms: Vec<TermJson>,
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    let (re, im) = (clean(z.re), clean(z.im));
    if im == 0.0 {
        format!("{re}")
    } else if re == 0.0 {
        format!("{im}i")
    } else {
        format!("({re}{im:+}i)")
    }
}

impl fmt::Display for NCSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if c.shape() == (1, 1) {
                f.write_str(&fmt_complex(c[(0, 0)]))?;
            } else {
                f.write_str("[")?;
                for r in 0..c.nrows() {
                    if r > 0 {
                        f.write_str("; ")?;
                    }
                    let row: Vec<String> = (0..c.ncols()).map(|j| fmt_complex(c[(r, j)])).collect();
                    f.write_str(&row.join(", "))?;
                }
                f.write_str("]")?;
            }
            if !w.is_empty() {
                write!(f, " {w}")?;
            }
        }
        Ok(())
    }
}
