//! Derivatives of free functions.
//!
//! Symbolic derivatives act on series word by word and produce
//! [`DirectionalForm`]s: series over the doubled alphabet `Z_1..Z_d, H_1..H_d`
//! (variables `0..d` are the `Z` letters, `d..2d` the `H` letters). Numerical
//! derivatives use finite differences of `z ↦ f(Z + zH)`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::eval_series;
use crate::linalg::{self, c, CMat, ONE};
use crate::random;
use crate::series::{fmt_complex, NCSeries};
use crate::tuple::MatrixTuple;
use crate::word::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DerivOp {
    #[serde(rename = "D")]
    D,
    #[serde(rename = "Dstar")]
    Dstar,
    #[serde(rename = "hessian")]
    Hessian,
    #[serde(rename = "DR")]
    DR,
    #[serde(rename = "DR2")]
    DR2,
}

impl DerivOp {
    pub const ALL: [DerivOp; 5] = [DerivOp::D, DerivOp::Dstar, DerivOp::Hessian, DerivOp::DR, DerivOp::DR2];

    pub fn name(self) -> &'static str {
        match self {
            DerivOp::D => "D",
            DerivOp::Dstar => "Dstar",
            DerivOp::Hessian => "hessian",
            DerivOp::DR => "DR",
            DerivOp::DR2 => "DR2",
        }
    }
}

impl std::str::FromStr for DerivOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DerivOp::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unsupported(format!("unknown derivative operator `{s}`")))
    }
}

/// Degree of a form in the direction letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    /// Exact degrees in `H` and in `H*`.
    Split { h: usize, hstar: usize },
    /// Total degree in `H` and `H*` together.
    Total(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalForm {
    d: usize,
    homogeneity: Homogeneity,
    series: NCSeries,
}

impl DirectionalForm {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn homogeneity(&self) -> Homogeneity {
        self.homogeneity
    }

    /// The underlying series over `2d` letters.
    pub fn series(&self) -> &NCSeries {
        &self.series
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    /// Builds a form from scalar terms written with `Z`/`H` letters, e.g.
    /// `("H2 Z2* Z1", 1.0)`.
    pub fn from_terms<'a>(
        d: usize,
        homogeneity: Homogeneity,
        maxdeg: usize,
        terms: impl IntoIterator<Item = (&'a str, Complex64)>,
    ) -> Result<Self> {
        let mut s = NCSeries::zero(2 * d, 1, maxdeg);
        for (text, coeff) in terms {
            let mut letters = Vec::new();
            for tok in text.split_whitespace() {
                let (body, starred) = match tok.strip_suffix('*') {
                    Some(b) => (b, true),
                    None => (tok, false),
                };
                let (offset, idx) = if let Some(i) = body.strip_prefix('Z') {
                    (0, i)
                } else if let Some(i) = body.strip_prefix('H') {
                    (d, i)
                } else {
                    return Err(Error::InvalidWord(text.into()));
                };
                let i: usize = idx.parse().map_err(|_| Error::InvalidWord(text.into()))?;
                if i == 0 || i > d {
                    return Err(Error::InvalidWord(text.into()));
                }
                letters.push(Letter::new((offset + i - 1) as u16, starred));
            }
            s.add_term(Word::new(letters), CMat::from_element(1, 1, coeff));
        }
        let f = DirectionalForm { d, homogeneity, series: s };
        f.check_homogeneity()?;
        Ok(f)
    }

    fn check_homogeneity(&self) -> Result<()> {
        for w in self.series.terms().keys() {
            let h = w.letters().iter().filter(|l| l.var as usize >= self.d && !l.starred).count();
            let hs = w.letters().iter().filter(|l| l.var as usize >= self.d && l.starred).count();
            let ok = match self.homogeneity {
                Homogeneity::Split { h: a, hstar: b } => h == a && hs == b,
                Homogeneity::Total(t) => h + hs == t,
            };
            if !ok {
                return Err(Error::InvalidWord(format!("{} is not homogeneous as declared", self.word_name(w))));
            }
        }
        Ok(())
    }

    fn word_name(&self, w: &Word) -> String {
        w.letters()
            .iter()
            .map(|l| {
                let (sym, i) =
                    if (l.var as usize) < self.d { ('Z', l.var as usize) } else { ('H', l.var as usize - self.d) };
                format!("{sym}{}{}", i + 1, if l.starred { "*" } else { "" })
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Largest coefficient distance to another form.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        self.series.max_coeff_diff(&other.series)
    }
}

impl fmt::Display for DirectionalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.series.is_zero() {
            return f.write_str("0");
        }
        for (i, (w, coeff)) in self.series.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if coeff.shape() == (1, 1) {
                if coeff[(0, 0)] != ONE {
                    write!(f, "{} ", fmt_complex(coeff[(0, 0)]))?;
                }
            } else {
                f.write_str("[coeff] ")?;
            }
            f.write_str(&self.word_name(w))?;
        }
        Ok(())
    }
}

/// Replaces exactly one `Z` letter satisfying `pick` by the matching `H` letter
/// (same star), summing over positions.
fn replace_one(s: &NCSeries, d: usize, pick: impl Fn(Letter) -> bool) -> NCSeries {
    let mut out = NCSeries::zero_rect(s.nvars(), s.rows(), s.cols(), s.maxdeg());
    for (w, coeff) in s.iter() {
        let letters = w.letters();
        for (p, &l) in letters.iter().enumerate() {
            if (l.var as usize) < d && pick(l) {
                let mut v = letters.to_vec();
                v[p] = Letter::new(l.var + d as u16, l.starred);
                out.add_term(Word::new(v), coeff.clone());
            }
        }
    }
    out
}

fn doubled(s: &NCSeries) -> NCSeries {
    s.with_nvars(2 * s.nvars()).expect("widening never drops letters")
}

/// `Df(Z)[H]`: replace one unstarred letter `Z_i` by `H_i`.
pub fn derivative(s: &NCSeries) -> DirectionalForm {
    let d = s.nvars();
    DirectionalForm {
        d,
        homogeneity: Homogeneity::Split { h: 1, hstar: 0 },
        series: replace_one(&doubled(s), d, |l| !l.starred),
    }
}

/// `D*f(Z)[H]`: replace one starred letter `Z_i*` by `H_i*`.
pub fn conj_derivative(s: &NCSeries) -> DirectionalForm {
    let d = s.nvars();
    DirectionalForm {
        d,
        homogeneity: Homogeneity::Split { h: 0, hstar: 1 },
        series: replace_one(&doubled(s), d, |l| l.starred),
    }
}

/// `Δf(Z)[H] = D*Df(Z)[H][H]`.
pub fn complex_hessian(s: &NCSeries) -> DirectionalForm {
    let d = s.nvars();
    let first = replace_one(&doubled(s), d, |l| !l.starred);
    DirectionalForm {
        d,
        homogeneity: Homogeneity::Split { h: 1, hstar: 1 },
        series: replace_one(&first, d, |l| l.starred),
    }
}

/// Hessian computed in the other order, `D D*`; equal to [`complex_hessian`].
pub fn complex_hessian_reversed(s: &NCSeries) -> DirectionalForm {
    let d = s.nvars();
    let first = replace_one(&doubled(s), d, |l| l.starred);
    DirectionalForm {
        d,
        homogeneity: Homogeneity::Split { h: 1, hstar: 1 },
        series: replace_one(&first, d, |l| !l.starred),
    }
}

/// `D_R f(Z)[H]`: replace any one letter by the `H` letter with the same star.
pub fn real_derivative(s: &NCSeries) -> DirectionalForm {
    let d = s.nvars();
    DirectionalForm { d, homogeneity: Homogeneity::Total(1), series: replace_one(&doubled(s), d, |_| true) }
}

/// `D_R² f(Z)[H] = d²/dt² f(Z + tH)|_{t=0}`: ordered pairs of replaced letters.
pub fn real_second_derivative(s: &NCSeries) -> DirectionalForm {
    let d = s.nvars();
    let first = replace_one(&doubled(s), d, |_| true);
    DirectionalForm { d, homogeneity: Homogeneity::Total(2), series: replace_one(&first, d, |_| true) }
}

pub fn symbolic(s: &NCSeries, op: DerivOp) -> DirectionalForm {
    match op {
        DerivOp::D => derivative(s),
        DerivOp::Dstar => conj_derivative(s),
        DerivOp::Hessian => complex_hessian(s),
        DerivOp::DR => real_derivative(s),
        DerivOp::DR2 => real_second_derivative(s),
    }
}

/// Evaluates a form at the point `Z` in direction `H`.
pub fn eval_form(f: &DirectionalForm, z: &MatrixTuple, h: &MatrixTuple) -> Result<CMat> {
    if z.d() != f.d || h.d() != f.d {
        return Err(Error::DimensionMismatch(format!(
            "form has d = {}, point has d = {}, direction has d = {}",
            f.d,
            z.d(),
            h.d()
        )));
    }
    eval_series(&f.series, &z.concat(h)?)
}

/// Finite-difference parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { step: 1e-3, richardson: true }
    }
}

fn stencil(
    f: &dyn Fn(&MatrixTuple) -> Result<CMat>,
    z: &MatrixTuple,
    h: &MatrixTuple,
    op: DerivOp,
    step: f64,
) -> Result<CMat> {
    let phi = |t: Complex64| -> Result<CMat> {
        f(&z.axpy(t, h)?).map_err(|e| Error::Evaluation(format!("inside the stencil: {e}")))
    };
    let hx = c(step, 0.0);
    let hy = c(0.0, step);
    Ok(match op {
        DerivOp::D | DerivOp::Dstar => {
            let dx = (phi(hx)? - phi(-hx)?).scale(0.5 / step);
            let dy = (phi(hy)? - phi(-hy)?).scale(0.5 / step);
            let sign = if op == DerivOp::D { -1.0 } else { 1.0 };
            (dx + dy.map(|e| e * c(0.0, sign))).scale(0.5)
        }
        DerivOp::Hessian => {
            let centre = phi(c(0.0, 0.0))?;
            (phi(hx)? + phi(-hx)? + phi(hy)? + phi(-hy)? - centre.scale(4.0)).scale(0.25 / (step * step))
        }
        DerivOp::DR => (phi(hx)? - phi(-hx)?).scale(0.5 / step),
        DerivOp::DR2 => {
            let centre = phi(c(0.0, 0.0))?;
            (phi(hx)? + phi(-hx)? - centre.scale(2.0)).scale(1.0 / (step * step))
        }
    })
}

/// Central finite differences of `z ↦ f(Z + zH)` with one optional
/// Richardson extrapolation step.
pub fn fd_derivative(
    f: &dyn Fn(&MatrixTuple) -> Result<CMat>,
    z: &MatrixTuple,
    h: &MatrixTuple,
    op: DerivOp,
    cfg: FdConfig,
) -> Result<CMat> {
    let coarse = stencil(f, z, h, op, cfg.step)?;
    if !cfg.richardson {
        return Ok(coarse);
    }
    let fine = stencil(f, z, h, op, cfg.step / 2.0)?;
    Ok((fine.scale(4.0) - coarse).scale(1.0 / 3.0))
}

/// `‖a − b‖ ≤ tol·max(1, ‖b‖)` in Frobenius norm.
pub fn agrees(a: &CMat, b: &CMat, tol: f64) -> bool {
    (a - b).norm() <= tol * b.norm().max(1.0)
}

/// Sampler settings for [`psh_sample_test`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub samples: usize,
    pub radius: f64,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub workers: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig { samples: 200, radius: 0.5, sizes: vec![1, 2, 3, 4], seed: 7, tol: 1e-9, workers: 1 }
    }
}

#[derive(Clone, Debug)]
pub enum SampleOutcome {
    NoWitness { evaluated: usize },
    Witness { z: MatrixTuple, h: MatrixTuple, min_eig: f64, vector: Vec<Complex64> },
}

impl SampleOutcome {
    pub fn is_witness(&self) -> bool {
        matches!(self, SampleOutcome::Witness { .. })
    }
}

fn probe(hess: &DirectionalForm, z: &MatrixTuple, h: &MatrixTuple, tol: f64) -> Result<Option<(f64, Vec<Complex64>)>> {
    let m = linalg::hermitian_part(&eval_form(hess, z, h)?);
    let report = linalg::psd_check(&m, tol)?;
    Ok(report.witness.map(|v| (report.min_eigenvalue, v)))
}

fn sample_pair(cfg: &SamplerConfig, d: usize, i: usize) -> (MatrixTuple, MatrixTuple) {
    let mut r = random::rng(cfg.seed, i as u64);
    let sizes = if cfg.sizes.is_empty() { &[1][..] } else { &cfg.sizes[..] };
    let n = sizes[i % sizes.len()];
    let z = random::tuple_in_ball(&mut r, n, d, cfg.radius);
    let h = random::ginibre_tuple(&mut r, n, d);
    (z, h)
}

/// Looks for a point where the complex Hessian fails to be positive
/// semidefinite: first the explicit `probes`, then `cfg.samples` seeded
/// Ginibre draws of size cycling through `cfg.sizes` inside the ball of
/// radius `cfg.radius`. The witness with the lowest sample index is returned.
pub fn psh_sample_test(
    s: &NCSeries,
    probes: &[(MatrixTuple, MatrixTuple)],
    cfg: &SamplerConfig,
) -> Result<SampleOutcome> {
    let hess = complex_hessian(s);
    for (z, h) in probes {
        if let Some((min_eig, vector)) = probe(&hess, z, h, cfg.tol)? {
            return Ok(SampleOutcome::Witness { z: z.clone(), h: h.clone(), min_eig, vector });
        }
    }
    let d = s.nvars();
    let workers = cfg.workers.max(1).min(cfg.samples.max(1));
    let run = |range: std::ops::Range<usize>| -> Result<Option<(usize, f64, Vec<Complex64>)>> {
        for i in range {
            let (z, h) = sample_pair(cfg, d, i);
            if let Some((m, v)) = probe(&hess, &z, &h, cfg.tol)? {
                return Ok(Some((i, m, v)));
            }
        }
        Ok(None)
    };
    let chunk = cfg.samples.div_ceil(workers);
    let results: Vec<Result<Option<(usize, f64, Vec<Complex64>)>>> = if workers == 1 {
        vec![run(0..cfg.samples)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let lo = (w * chunk).min(cfg.samples);
                    let hi = ((w + 1) * chunk).min(cfg.samples);
                    let run = &run;
                    scope.spawn(move || run(lo..hi))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampler thread")).collect()
        })
    };
    let mut best: Option<(usize, f64, Vec<Complex64>)> = None;
    for r in results {
        if let Some(hit) = r? {
            if best.as_ref().is_none_or(|b| hit.0 < b.0) {
                best = Some(hit);
            }
        }
    }
    Ok(match best {
        Some((i, min_eig, vector)) => {
            let (z, h) = sample_pair(cfg, d, i);
            SampleOutcome::Witness { z, h, min_eig, vector }
        }
        None => SampleOutcome::NoWitness { evaluated: probes.len() + cfg.samples },
    })
}

/// Analytic `f` with `Re f = u` and `f(0) = u(0)`, namely
/// `f = c₀ + 2·(analytic part of u)`.
pub fn pluriharmonic_conjugate(u: &NCSeries) -> Result<NCSeries> {
    let scale = u.iter().map(|(_, c)| c.norm()).fold(1.0, f64::max);
    let dev = u.self_adjoint_deviation();
    if dev > 1e-12 * scale {
        return Err(Error::NotSelfAdjoint { deviation: dev });
    }
    if let Some((w, _)) = u.mixed_part().iter().next() {
        return Err(Error::NotPluriharmonic { word: w.to_string() });
    }
    let c0 = NCSeries::constant(u.nvars(), u.constant_term(), u.maxdeg());
    c0.add(&u.analytic_part().scale(linalg::re(2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expand, parse};
    use crate::linalg::{re, real_mat};

    fn series(text: &str, d: usize, maxdeg: usize) -> NCSeries {
        expand(&parse(text).unwrap(), d, maxdeg).unwrap()
    }

    fn form(d: usize, hom: Homogeneity, terms: &[&str]) -> DirectionalForm {
        DirectionalForm::from_terms(d, hom, 6, terms.iter().map(|t| (*t, ONE))).unwrap()
    }

    const F: &str = "x1 + x1' + x2 x2' x1 + x2' x2 x1'";
    const D10: Homogeneity = Homogeneity::Split { h: 1, hstar: 0 };
    const D01: Homogeneity = Homogeneity::Split { h: 0, hstar: 1 };
    const D11: Homogeneity = Homogeneity::Split { h: 1, hstar: 1 };

    #[test]
    fn worked_example_derivative() {
        let f = series(F, 2, 6);
        let expected = form(2, D10, &["H1", "H2 Z2* Z1", "Z2 Z2* H1", "Z2* H2 Z1*"]);
        assert_eq!(derivative(&f), expected);
    }

    #[test]
    fn worked_example_conj_derivative() {
        let f = series(F, 2, 6);
        let expected = form(2, D01, &["H1*", "H2* Z2 Z1*", "Z2* Z2 H1*", "Z2 H2* Z1"]);
        assert_eq!(conj_derivative(&f), expected);
    }

    #[test]
    fn worked_example_hessian() {
        let f = series(F, 2, 6);
        let expected = form(2, D11, &["H2 H2* Z1", "Z2 H2* H1", "H2* H2 Z1*", "Z2* H2 H1*"]);
        assert_eq!(complex_hessian(&f), expected);
        assert_eq!(complex_hessian_reversed(&f), expected);
    }

    #[test]
    fn simple_derivatives() {
        assert!(derivative(&series("x1'", 1, 6)).is_zero());
        assert_eq!(conj_derivative(&series("x1'", 1, 6)), form(1, D01, &["H1*"]));
        assert_eq!(derivative(&series("x1^2", 1, 6)), form(1, D10, &["H1 Z1", "Z1 H1"]));
        assert!(conj_derivative(&series("x1^2 + x1 x2", 2, 6)).is_zero());
        assert_eq!(complex_hessian(&series("x1' x1", 1, 6)), form(1, D11, &["H1* H1"]));
        assert!(complex_hessian(&series("x1 + x1'", 1, 6)).is_zero());
    }

    #[test]
    fn real_second_derivatives() {
        let q = real_second_derivative(&series("x1' x1", 1, 6));
        let expected = DirectionalForm::from_terms(1, Homogeneity::Total(2), 6, [("H1* H1", re(2.0))]).unwrap();
        assert_eq!(q, expected);
        let sq = real_second_derivative(&series("x1^2", 1, 6));
        let expected = DirectionalForm::from_terms(1, Homogeneity::Total(2), 6, [("H1 H1", re(2.0))]).unwrap();
        assert_eq!(sq, expected);
        assert!(real_second_derivative(&series("x1 + 2 x1'", 1, 6)).is_zero());
    }

    fn e12() -> MatrixTuple {
        MatrixTuple::new(vec![real_mat(2, 2, &[0.0, 1.0, 0.0, 0.0])]).unwrap()
    }

    #[test]
    fn log_modulus_hessian_symbolic() {
        // log|Z| around Z = I in the shifted variable Y = Z − I.
        let s = series("0.5 log(1 + x1 + x1' + x1' x1)", 1, 4);
        let m = eval_form(&complex_hessian(&s), &MatrixTuple::zeros(2, 1), &e12()).unwrap();
        let expected = real_mat(2, 2, &[-0.25, 0.0, 0.0, 0.25]);
        assert!((m - expected).norm() < 1e-8);
    }

    #[test]
    fn log_modulus_hessian_fd() {
        let e = parse("0.5 log(x1' x1)").unwrap();
        let f = |x: &MatrixTuple| crate::eval::eval_expr(&e, x);
        let z = MatrixTuple::new(vec![linalg::eye(2)]).unwrap();
        let m = fd_derivative(&f, &z, &e12(), DerivOp::Hessian, FdConfig::default()).unwrap();
        let expected = real_mat(2, 2, &[-0.25, 0.0, 0.0, 0.25]);
        assert!((m - expected).norm() < 1e-5);
    }

    #[test]
    fn hessian_of_hereditary_square_is_exact() {
        let s = series("x1' x1", 1, 3);
        let mut r = random::rng(3, 0);
        let z = random::ginibre_tuple(&mut r, 3, 1);
        let h = random::ginibre_tuple(&mut r, 3, 1);
        let m = eval_form(&complex_hessian(&s), &z, &h).unwrap();
        assert!((m - h.get(0).adjoint() * h.get(0)).norm() < 1e-14);
        let zero = MatrixTuple::zeros(3, 1);
        assert!(eval_form(&complex_hessian(&s), &z, &zero).unwrap().norm() == 0.0);
    }

    #[test]
    fn fd_matches_symbolic_on_worked_example() {
        let s = series(F, 2, 6);
        let mut r = random::rng(11, 0);
        let z = random::tuple_in_ball(&mut r, 3, 2, 1.0);
        let h = random::tuple_in_ball(&mut r, 3, 2, 1.0);
        let f = |x: &MatrixTuple| eval_series(&s, x);
        for op in DerivOp::ALL {
            let sym = eval_form(&symbolic(&s, op), &z, &h).unwrap();
            let fd = fd_derivative(&f, &z, &h, op, FdConfig::default()).unwrap();
            assert!(agrees(&fd, &sym, 1e-6), "{op:?}");
        }
    }

    #[test]
    fn constants_have_zero_derivatives() {
        let s = NCSeries::scalar(1, 1, c(2.0, 1.0), 3);
        let f = |x: &MatrixTuple| eval_series(&s, x);
        let z = MatrixTuple::new(vec![linalg::eye(2)]).unwrap();
        for op in DerivOp::ALL {
            assert!(symbolic(&s, op).is_zero());
            let fd = fd_derivative(&f, &z, &e12(), op, FdConfig::default()).unwrap();
            assert!(fd.norm() < 1e-9);
        }
    }

    #[test]
    fn sampler_verdicts() {
        let cfg = SamplerConfig { samples: 40, ..Default::default() };
        let pos = series("x1' x1", 1, 3);
        assert!(!psh_sample_test(&pos, &[], &cfg).unwrap().is_witness());
        let neg = series("-x1' x1", 1, 3);
        match psh_sample_test(&neg, &[], &cfg).unwrap() {
            SampleOutcome::Witness { h, min_eig, .. } => {
                let hh = h.get(0).adjoint() * h.get(0);
                assert!((min_eig + linalg::hermitian_eigen(&hh).values.last().unwrap()).abs() < 1e-10);
            }
            other => panic!("expected a witness, got {other:?}"),
        }
        let par = SamplerConfig { workers: 3, ..cfg.clone() };
        let a = psh_sample_test(&neg, &[], &cfg).unwrap();
        let b = psh_sample_test(&neg, &[], &par).unwrap();
        match (a, b) {
            (SampleOutcome::Witness { z: z1, .. }, SampleOutcome::Witness { z: z2, .. }) => assert_eq!(z1, z2),
            _ => panic!("both runs should find a witness"),
        }
    }

    #[test]
    fn sampler_finds_log_modulus_witness() {
        let s = series("0.5 log(1 + x1 + x1' + x1' x1)", 1, 4);
        let probes = [(MatrixTuple::zeros(2, 1), e12())];
        let out = psh_sample_test(&s, &probes, &SamplerConfig::default()).unwrap();
        match out {
            SampleOutcome::Witness { min_eig, .. } => assert!((min_eig + 0.25).abs() < 1e-8),
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn conjugates() {
        let u = series("0.5 x1 + 0.5 x1'", 1, 3);
        assert_eq!(pluriharmonic_conjugate(&u).unwrap(), series("x1", 1, 3));
        let u = series("re(x1^2)", 1, 3);
        assert!(pluriharmonic_conjugate(&u).unwrap().max_coeff_diff(&series("x1^2", 1, 3)) < 1e-15);
        let u = series("x1' x1", 1, 3);
        match pluriharmonic_conjugate(&u) {
            Err(Error::NotPluriharmonic { word }) => assert_eq!(word, "z1* z1"),
            other => panic!("unexpected {other:?}"),
        }
        let u = series("3 + x1 + x1' + 2i x1 x1 - 2i x1' x1'", 1, 3);
        let f = pluriharmonic_conjugate(&u).unwrap();
        assert!(f.is_analytic());
        assert!(f.real_part().max_coeff_diff(&u) < 1e-15);
    }
}
