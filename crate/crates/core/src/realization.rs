//! GNS-style realizations of plurisubharmonic series.
//!
//! From the middle matrices `C⁺`, `C⁻` of a series `f` we build
//!
//! ```text
//! f(Z) = Re g(Z) + [v⁺(Z); v⁻(Z)]* [[1, −T(Z)], [−T(Z)*, 1]]⁻¹ [v⁺(Z); v⁻(Z)]
//! ```
//!
//! with `v⁺ = Σ Q_α Z^α` over analytic words, `v⁻ = Σ Q_μ Z^μ` over coanalytic
//! words and `T = Σ T_γ Z^γ` analytic. The spaces `H±` are spans of the formal
//! vectors `[α ⊗ w]` with inner product `⟨[β⊗w], [γ⊗u]⟩ = u* c_{γ*β} w`; they
//! are coordinatized by eigen-decomposing the Gram matrices and discarding
//! directions below `null_cutoff · λ_max`.
//!
//! `T_γ : H⁻ → H⁺` sends `[μ⊗w]` to `[γμ⊗w]`. Its matrix elements against `H⁺`
//! are `c_{α*γμ}`; entries whose word is longer than the truncation are
//! dropped. Each operator is stored as a rectangular series coefficient, so
//! `v⁺` is an `r⁺ × k` series, `v⁻` is `r⁻ × k` and `T` is `r⁺ × r⁻`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::calculus::{conj_derivative, derivative, eval_form};
use crate::error::{Error, Result};
use crate::eval::eval_series;
use crate::linalg::{self, CMat};
use crate::middle::{build_middle, GramKind, MiddleMatrix};
use crate::random;
use crate::series::{NCSeries, SeriesJson};
use crate::tuple::MatrixTuple;
use crate::word::{Word, WordKind};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationOptions {
    /// PSD tolerance for the Gram matrices, relative to their largest eigenvalue.
    pub tol: f64,
    /// Relative eigenvalue threshold defining the quotient by null vectors.
    pub null_cutoff: f64,
    /// When set, the retained coordinates are rotated by seeded random unitaries.
    pub basis_seed: Option<u64>,
}

impl Default for RealizationOptions {
    fn default() -> Self {
        RealizationOptions { tol: 1e-9, null_cutoff: 1e-10, basis_seed: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealizationDiagnostics {
    pub rank_plus: usize,
    pub rank_minus: usize,
    pub min_eig_plus: f64,
    pub min_eig_minus: f64,
    /// `max_γ ‖T_γ‖^{1/|γ|}` over the computed words.
    pub growth: f64,
    /// `‖c₀ − c₀*‖_F`.
    pub c0_asymmetry: f64,
    /// Matrix elements of `T` skipped because their word exceeds `maxdeg`.
    pub dropped_entries: usize,
}

#[derive(Clone, Debug)]
pub struct Realization {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub maxdeg: usize,
    /// Scalar center; the realization describes `f(center + Z)`.
    pub center: Vec<Complex64>,
    pub null_cutoff: f64,
    pub g: NCSeries,
    /// Middle matrices the realization was built from; absent for realizations
    /// produced by transforms.
    pub gram_plus: Option<MiddleMatrix>,
    pub gram_minus: Option<MiddleMatrix>,
    pub v_plus: NCSeries,
    pub v_minus: NCSeries,
    pub t: NCSeries,
    pub diagnostics: RealizationDiagnostics,
}

struct Coordinates {
    /// `Φ = Λ^{1/2} U*`, mapping index coordinates to orthonormal ones.
    phi: CMat,
    /// `Λ^{-1/2} U*`, so that `(Φ*)⁺ = pinv`.
    pinv: CMat,
    min_eig: f64,
}

fn coordinates(m: &MiddleMatrix, opts: &RealizationOptions, stream: u64) -> Result<Coordinates> {
    let dim = m.gram.nrows();
    if dim == 0 {
        return Ok(Coordinates { phi: linalg::zeros(0, 0), pinv: linalg::zeros(0, 0), min_eig: 0.0 });
    }
    let eig = linalg::hermitian_eigen(&m.gram);
    let lmax = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min_eig = eig.values[0];
    if min_eig < -opts.tol * lmax.max(1.0) {
        return Err(Error::GramNotPsd { kind: m.kind.label(), min_eig });
    }
    let keep: Vec<usize> = (0..dim).filter(|&i| lmax > 0.0 && eig.values[i] > opts.null_cutoff * lmax).collect();
    let r = keep.len();
    let mut phi = linalg::zeros(r, dim);
    let mut pinv = linalg::zeros(r, dim);
    for (row, &i) in keep.iter().enumerate() {
        let u = eig.vectors.column(i).adjoint();
        let s = eig.values[i].sqrt();
        phi.row_mut(row).copy_from(&u.scale(s));
        pinv.row_mut(row).copy_from(&u.scale(1.0 / s));
    }
    if let Some(seed) = opts.basis_seed {
        let w = random::unitary(&mut random::rng(seed, stream), r);
        phi = &w * phi;
        pinv = &w * pinv;
    }
    Ok(Coordinates { phi, pinv, min_eig })
}

/// Builds the realization of `s` at truncation level `n`, centered at the origin.
pub fn build_realization(s: &NCSeries, n: usize, opts: &RealizationOptions) -> Result<Realization> {
    let deviation = s.self_adjoint_deviation();
    let scale = s.iter().map(|(_, c)| c.norm()).fold(1.0, f64::max);
    if deviation > 1e-9 * scale {
        return Err(Error::NotSelfAdjoint { deviation });
    }
    let (d, k, maxdeg) = (s.nvars(), s.k(), s.maxdeg());
    let gram_plus = build_middle(s, GramKind::Plus, n)?;
    let gram_minus = build_middle(s, GramKind::Minus, n)?;
    let plus = coordinates(&gram_plus, opts, 1)?;
    let minus = coordinates(&gram_minus, opts, 2)?;
    let (rp, rm) = (plus.phi.nrows(), minus.phi.nrows());

    let words_plus = Word::pure_words(d, n, false);
    let words_minus = Word::pure_words(d, n, true);

    let mut v_plus = NCSeries::zero_rect(d, rp, k, maxdeg);
    for (p, a) in words_plus.iter().enumerate() {
        v_plus.add_term(a.clone(), plus.phi.columns(p * k, k).into_owned());
    }
    let mut v_minus = NCSeries::zero_rect(d, rm, k, maxdeg);
    for (p, m) in words_minus.iter().enumerate() {
        v_minus.add_term(m.clone(), minus.phi.columns(p * k, k).into_owned());
    }

    let mut t = NCSeries::zero_rect(d, rp, rm, maxdeg);
    let mut dropped = 0;
    let mut growth: f64 = 0.0;
    for gamma in &words_plus {
        let mut kmat = linalg::zeros(words_plus.len() * k, words_minus.len() * k);
        for (p, a) in words_plus.iter().enumerate() {
            let left = a.involution().concat(gamma);
            for (q, m) in words_minus.iter().enumerate() {
                if left.len() + m.len() > maxdeg {
                    dropped += k * k;
                    continue;
                }
                if let Some(c) = s.get(&left.concat(m)) {
                    kmat.view_mut((p * k, q * k), (k, k)).copy_from(c);
                }
            }
        }
        let tau = &plus.pinv * kmat * minus.pinv.adjoint();
        growth = growth.max(linalg::op_norm(&tau).powf(1.0 / gamma.len() as f64));
        t.add_term(gamma.clone(), tau);
    }

    let c0 = s.constant_term();
    let g = NCSeries::constant(d, c0.clone(), maxdeg)
        .add(&s.analytic_part().filter(|w| !w.is_empty()).scale(linalg::re(2.0)))?;

    Ok(Realization {
        n,
        d,
        k,
        maxdeg,
        center: vec![linalg::ZERO; d],
        null_cutoff: opts.null_cutoff,
        g,
        gram_plus: Some(gram_plus),
        gram_minus: Some(gram_minus),
        v_plus,
        v_minus,
        t,
        diagnostics: RealizationDiagnostics {
            rank_plus: rp,
            rank_minus: rm,
            min_eig_plus: plus.min_eig,
            min_eig_minus: minus.min_eig,
            growth,
            c0_asymmetry: (&c0 - c0.adjoint()).norm(),
            dropped_entries: dropped,
        },
    })
}

/// Evaluated pieces of the realization at a displacement `Z` from the center.
struct Pieces {
    v: CMat,
    resolvent: CMat,
    re_g: CMat,
}

impl Realization {
    /// Assembles a realization from its operator data. `n` bounds the word
    /// length of the blocks used by [`Realization::reconstruct_coefficient`].
    pub fn from_parts(
        n: usize,
        center: Vec<Complex64>,
        g: NCSeries,
        v_plus: NCSeries,
        v_minus: NCSeries,
        t: NCSeries,
    ) -> Result<Self> {
        let (d, k) = (g.nvars(), g.k());
        let (rp, rm) = (v_plus.rows(), v_minus.rows());
        if center.len() != d
            || g.rows() != g.cols()
            || [v_plus.nvars(), v_minus.nvars(), t.nvars()].iter().any(|&x| x != d)
            || v_plus.cols() != k
            || v_minus.cols() != k
            || t.rows() != rp
            || t.cols() != rm
        {
            return Err(Error::DimensionMismatch("inconsistent realization shapes".into()));
        }
        for s in [&v_plus, &v_minus, &t] {
            if s.get(&Word::empty()).is_some() {
                return Err(Error::PreconditionViolated("v⁺, v⁻ and T must vanish at the center".into()));
            }
        }
        let maxdeg = g.maxdeg().max(v_plus.maxdeg()).max(v_minus.maxdeg()).max(t.maxdeg());
        let growth = t.iter().map(|(w, c)| linalg::op_norm(c).powf(1.0 / w.len() as f64)).fold(0.0, f64::max);
        let c0 = g.constant_term();
        let diagnostics = RealizationDiagnostics {
            rank_plus: rp,
            rank_minus: rm,
            min_eig_plus: 0.0,
            min_eig_minus: 0.0,
            growth,
            c0_asymmetry: (&c0 - c0.adjoint()).norm(),
            dropped_entries: 0,
        };
        Ok(Realization {
            n,
            d,
            k,
            maxdeg,
            center,
            null_cutoff: 0.0,
            g,
            gram_plus: None,
            gram_minus: None,
            v_plus,
            v_minus,
            t,
            diagnostics,
        })
    }

    pub fn rank_plus(&self) -> usize {
        self.v_plus.rows()
    }

    pub fn rank_minus(&self) -> usize {
        self.v_minus.rows()
    }

    /// `Z − center`.
    pub fn displacement(&self, x: &MatrixTuple) -> Result<MatrixTuple> {
        if x.d() != self.d {
            return Err(Error::DimensionMismatch(format!("realization has d = {}, point has d = {}", self.d, x.d())));
        }
        x.sub(&MatrixTuple::scalar_point(x.n(), &self.center))
    }

    fn pieces(&self, z: &MatrixTuple) -> Result<Pieces> {
        let n = z.n();
        let (rp, rm) = (self.rank_plus(), self.rank_minus());
        let t = eval_series(&self.t, z)?;
        let norm = linalg::op_norm(&t);
        if norm >= 1.0 {
            return Err(Error::TNotContractive { norm });
        }
        let mut v = linalg::zeros(n * (rp + rm), n * self.k);
        v.rows_mut(0, n * rp).copy_from(&eval_series(&self.v_plus, z)?);
        v.rows_mut(n * rp, n * rm).copy_from(&eval_series(&self.v_minus, z)?);
        let mut block = linalg::eye(n * (rp + rm));
        block.view_mut((0, n * rp), (n * rp, n * rm)).copy_from(&(-&t));
        block.view_mut((n * rp, 0), (n * rm, n * rp)).copy_from(&(-t.adjoint()));
        let resolvent = linalg::inverse(&block)?;
        let re_g = linalg::hermitian_part(&eval_series(&self.g, z)?);
        Ok(Pieces { v, resolvent, re_g })
    }

    /// `‖T(Z − center)‖`.
    pub fn t_norm(&self, x: &MatrixTuple) -> Result<f64> {
        Ok(linalg::op_norm(&eval_series(&self.t, &self.displacement(x)?)?))
    }

    /// Evaluates the realization at the point `x`.
    pub fn eval(&self, x: &MatrixTuple) -> Result<CMat> {
        let p = self.pieces(&self.displacement(x)?)?;
        Ok(p.re_g + p.v.adjoint() * &p.resolvent * &p.v)
    }

    /// `Δf(x)[H] = p*Rp + q*Rq` with
    /// `p = [Dv⁺[H]; 0] + [[0, DT[H]], [0, 0]] R V` and
    /// `q = [0; D*v⁻[H]] + [[0, 0], [DT[H]*, 0]] R V`.
    pub fn hessian(&self, x: &MatrixTuple, h: &MatrixTuple) -> Result<CMat> {
        let z = self.displacement(x)?;
        if h.d() != self.d || h.n() != z.n() {
            return Err(Error::DimensionMismatch("direction shape differs from the point".into()));
        }
        let n = z.n();
        let (rp, rm) = (self.rank_plus(), self.rank_minus());
        let p = self.pieces(&z)?;
        let dt = eval_form(&derivative(&self.t), &z, h)?;
        let dvp = eval_form(&derivative(&self.v_plus), &z, h)?;
        let dvm = eval_form(&conj_derivative(&self.v_minus), &z, h)?;
        let rv = &p.resolvent * &p.v;
        let cols = n * self.k;
        let mut pv = linalg::zeros(n * (rp + rm), cols);
        pv.rows_mut(0, n * rp).copy_from(&(dvp + &dt * rv.rows(n * rp, n * rm)));
        let mut qv = linalg::zeros(n * (rp + rm), cols);
        qv.rows_mut(n * rp, n * rm).copy_from(&(dvm + dt.adjoint() * rv.rows(0, n * rp)));
        Ok(pv.adjoint() * &p.resolvent * &pv + qv.adjoint() * &p.resolvent * &qv)
    }

    /// The coefficient of `Z^β` reproduced from the realization data.
    ///
    /// Words with two or more analytic/coanalytic blocks come from the
    /// resolvent term `Q*_{α₀*} T_{α₁} ⋯ T_{α_{n−1}} Q_{α_n}`; the empty word and
    /// single-block words come from `Re g`.
    pub fn reconstruct_coefficient(&self, beta: &Word) -> Result<CMat> {
        if beta.var_bound() > self.d {
            return Err(Error::InvalidWord(format!("{beta} uses more than {} variables", self.d)));
        }
        let out_of_range = || Error::OutOfTruncation { word: beta.to_string() };
        let blocks = beta.blocks();
        if blocks.len() <= 1 {
            if beta.len() > self.maxdeg {
                return Err(out_of_range());
            }
            let half = linalg::re(0.5);
            return Ok(match beta.kind() {
                WordKind::Analytic => self.g.coeff(beta).map(|z| z * half),
                WordKind::Coanalytic => self.g.coeff(&beta.involution()).adjoint().map(|z| z * half),
                _ => linalg::hermitian_part(&self.g.constant_term()),
            });
        }
        if blocks.iter().any(|b| b.len() > self.n) {
            return Err(out_of_range());
        }
        let first = &blocks[0];
        let mut in_plus = first.is_coanalytic();
        let mut acc = if in_plus {
            self.v_plus.coeff(&first.involution()).adjoint()
        } else {
            self.v_minus.coeff(&first.involution()).adjoint()
        };
        for b in &blocks[1..blocks.len() - 1] {
            acc = if in_plus { acc * self.t.coeff(b) } else { acc * self.t.coeff(&b.involution()).adjoint() };
            in_plus = !in_plus;
        }
        let last = &blocks[blocks.len() - 1];
        Ok(if in_plus { acc * self.v_plus.coeff(last) } else { acc * self.v_minus.coeff(last) })
    }

    /// The realization expanded back into a series at the center.
    pub fn to_series(&self) -> Result<NCSeries> {
        let (d, maxdeg) = (self.d, self.maxdeg);
        let (rp, rm) = (self.rank_plus(), self.rank_minus());
        let v = NCSeries::vstack(&self.v_plus, &self.v_minus)?;
        let m = NCSeries::block2(
            &NCSeries::zero(d, rp, maxdeg),
            &self.t,
            &self.t.adjoint(),
            &NCSeries::zero(d, rm, maxdeg),
        )?;
        let resolvent = m.neumann()?;
        let quad = v.adjoint().mul(&resolvent.mul(&v)?)?;
        self.g.real_part().add(&quad)
    }

    /// Matrix elements `(source, target)` of the word action `T_α` that stay
    /// inside the truncation.
    pub fn action_table(&self, alpha: &Word) -> Vec<(Word, Word)> {
        Word::pure_words(self.d, self.n, true)
            .into_iter()
            .filter(|m| alpha.len() + m.len() + self.n <= self.maxdeg)
            .map(|m| {
                let target = alpha.concat(&m);
                (m, target)
            })
            .collect()
    }

    pub fn to_json(&self) -> RealizationJson {
        let gram = |m: &MiddleMatrix| GramJson {
            words: Word::pure_words(self.d, self.n, m.kind == GramKind::Minus).iter().map(Word::to_string).collect(),
            k: self.k,
            matrix: linalg::json::to_rows(&m.gram),
        };
        let actions = Word::pure_words(self.d, self.n, false)
            .iter()
            .map(|a| ActionJson {
                alpha: a.to_string(),
                pairs: self.action_table(a).iter().map(|(s, t)| [s.to_string(), t.to_string()]).collect(),
            })
            .collect();
        RealizationJson {
            n: self.n,
            d: self.d,
            k: self.k,
            maxdeg: self.maxdeg,
            center: linalg::json::vector(&self.center),
            null_cutoff: self.null_cutoff,
            g: self.g.to_json(),
            gram_plus: self.gram_plus.as_ref().map(gram),
            gram_minus: self.gram_minus.as_ref().map(gram),
            v_plus: self.v_plus.to_json(),
            v_minus: self.v_minus.to_json(),
            t: self.t.to_json(),
            actions,
            diagnostics: self.diagnostics.clone(),
        }
    }

    pub fn from_json(j: &RealizationJson) -> Result<Self> {
        let gram = |g: &GramJson, kind: GramKind| -> Result<MiddleMatrix> {
            let mut index = Vec::new();
            for w in &g.words {
                let w: Word = w.parse()?;
                index.extend((0..g.k).map(|a| (w.clone(), a)));
            }
            let m = linalg::json::from_rows(&g.matrix)?;
            if m.nrows() != index.len() || m.ncols() != index.len() {
                return Err(Error::DimensionMismatch("Gram matrix does not match its index".into()));
            }
            Ok(MiddleMatrix { kind, index, asymmetry: linalg::asymmetry(&m), gram: m })
        };
        let r = Realization {
            n: j.n,
            d: j.d,
            k: j.k,
            maxdeg: j.maxdeg,
            center: j.center.iter().map(|v| linalg::c(v[0], v[1])).collect(),
            null_cutoff: j.null_cutoff,
            g: NCSeries::from_json(&j.g)?,
            gram_plus: j.gram_plus.as_ref().map(|g| gram(g, GramKind::Plus)).transpose()?,
            gram_minus: j.gram_minus.as_ref().map(|g| gram(g, GramKind::Minus)).transpose()?,
            v_plus: NCSeries::from_json(&j.v_plus)?,
            v_minus: NCSeries::from_json(&j.v_minus)?,
            t: NCSeries::from_json(&j.t)?,
            diagnostics: j.diagnostics.clone(),
        };
        let (rp, rm) = (r.v_plus.rows(), r.v_minus.rows());
        if r.center.len() != r.d
            || r.g.k() != r.k
            || r.v_plus.cols() != r.k
            || r.v_minus.cols() != r.k
            || r.t.rows() != rp
            || r.t.cols() != rm
        {
            return Err(Error::DimensionMismatch("inconsistent realization shapes".into()));
        }
        Ok(r)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("realization serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramJson {
    pub words: Vec<String>,
    pub k: usize,
    pub matrix: linalg::json::Rows,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionJson {
    pub alpha: String,
    pub pairs: Vec<[String; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealizationJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub maxdeg: usize,
    pub center: Vec<[f64; 2]>,
    pub null_cutoff: f64,
    pub g: SeriesJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_plus: Option<GramJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_minus: Option<GramJson>,
    pub v_plus: SeriesJson,
    pub v_minus: SeriesJson,
    pub t: SeriesJson,
    pub actions: Vec<ActionJson>,
    pub diagnostics: RealizationDiagnostics,
}

/// Convex form `a₀ + L(X) + Λ(X)* (I − Γ(X))⁻¹ Λ(X)` with `L`, `Λ`, `Γ`
/// real-linear in `(X, X*)`, each given as a series supported on words of
/// length one.
#[derive(Clone, Debug)]
pub struct Butterfly {
    pub a0: CMat,
    pub l: NCSeries,
    pub lambda: NCSeries,
    pub gamma: NCSeries,
}

impl Butterfly {
    pub fn new(a0: CMat, l: NCSeries, lambda: NCSeries, gamma: NCSeries) -> Result<Self> {
        let k = a0.nrows();
        let h = gamma.rows();
        for s in [&l, &lambda, &gamma] {
            if s.iter().any(|(w, _)| w.len() != 1) {
                return Err(Error::PreconditionViolated("butterfly maps must be linear in (X, X*)".into()));
            }
        }
        let d = l.nvars();
        if !a0.is_square()
            || l.rows() != k
            || l.cols() != k
            || lambda.rows() != h
            || lambda.cols() != k
            || gamma.cols() != h
            || lambda.nvars() != d
            || gamma.nvars() != d
        {
            return Err(Error::DimensionMismatch("butterfly data shapes".into()));
        }
        Ok(Butterfly { a0, l, lambda, gamma })
    }

    fn resolvent(&self, x: &MatrixTuple) -> Result<CMat> {
        let g = eval_series(&self.gamma, x)?;
        let m = linalg::eye(g.nrows()) - g;
        let allowed = 1e-10 * m.norm().max(1.0);
        let min_eig = if m.nrows() == 0 { 1.0 } else { linalg::min_eig(&m) };
        if linalg::asymmetry(&m) > allowed || min_eig <= 0.0 {
            return Err(Error::ResolventSingular { min_eig });
        }
        linalg::inverse(&m)
    }

    pub fn eval(&self, x: &MatrixTuple) -> Result<CMat> {
        let r = self.resolvent(x)?;
        let lam = eval_series(&self.lambda, x)?;
        Ok(linalg::kron(&linalg::eye(x.n()), &self.a0) + eval_series(&self.l, x)? + lam.adjoint() * r * lam)
    }

    /// `D_R² f(X)[H] = 2 v* R v` with `v = Γ(H) R Λ(X) + Λ(H)`.
    pub fn second_derivative(&self, x: &MatrixTuple, h: &MatrixTuple) -> Result<CMat> {
        let r = self.resolvent(x)?;
        let v = eval_series(&self.gamma, h)? * &r * eval_series(&self.lambda, x)? + eval_series(&self.lambda, h)?;
        Ok((v.adjoint() * r * v).scale(2.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{agrees, fd_derivative, DerivOp, FdConfig};
    use crate::expr::{expand, parse};
    use crate::linalg::{c, re};
    use crate::word::w;

    fn series(text: &str, d: usize, maxdeg: usize) -> NCSeries {
        expand(&parse(text).unwrap(), d, maxdeg).unwrap()
    }

    fn point(seed: u64, n: usize, d: usize, radius: f64) -> MatrixTuple {
        random::tuple_in_ball(&mut random::rng(seed, 0), n, d, radius)
    }

    #[test]
    fn hermitian_square() {
        let s = series("x1' x1", 1, 4);
        let r = build_realization(&s, 2, &RealizationOptions::default()).unwrap();
        assert_eq!(r.rank_plus(), 1);
        assert_eq!(r.rank_minus(), 0);
        assert!(r.t.is_zero());
        assert!(r.g.is_zero());
        assert!((r.v_plus.coeff(&w("z1")) - linalg::eye(1)).norm() < 1e-14);
        assert!((r.reconstruct_coefficient(&w("z1* z1")).unwrap() - linalg::eye(1)).norm() < 1e-14);
        let x = point(3, 3, 1, 0.9);
        let z = x.get(0);
        assert!((r.eval(&x).unwrap() - z.adjoint() * z).norm() < 1e-12);
        let h = point(4, 3, 1, 1.0);
        let hh = h.get(0).adjoint() * h.get(0);
        assert!((r.hessian(&x, &h).unwrap() - hh).norm() < 1e-12);
        assert!(r.hessian(&x, &MatrixTuple::zeros(3, 1)).unwrap().norm() == 0.0);
    }

    #[test]
    fn real_part_is_all_g() {
        let s = series("0.5 x1 + 0.5 x1'", 1, 2);
        let r = build_realization(&s, 1, &RealizationOptions::default()).unwrap();
        assert_eq!((r.rank_plus(), r.rank_minus()), (0, 0));
        assert_eq!(r.g, NCSeries::monomial(1, w("z1"), linalg::eye(1), 2));
        let x = point(5, 2, 1, 0.5);
        assert!((r.eval(&x).unwrap() - linalg::hermitian_part(x.get(0))).norm() < 1e-14);
    }

    #[test]
    fn both_squares() {
        let s = series("x1' x1 + x1 x1'", 1, 4);
        let r = build_realization(&s, 2, &RealizationOptions::default()).unwrap();
        assert_eq!((r.rank_plus(), r.rank_minus()), (1, 1));
        assert!(r.t.is_zero());
        assert!((r.v_minus.coeff(&w("z1*")) - linalg::eye(1)).norm() < 1e-14);
        assert!(r.reconstruct_coefficient(&w("z1")).unwrap().norm() == 0.0);
        let x = point(6, 3, 1, 0.8);
        let z = x.get(0);
        assert!((r.eval(&x).unwrap() - (z.adjoint() * z + z * z.adjoint())).norm() < 1e-12);
    }

    #[test]
    fn origin_value_is_real_part_of_constant() {
        let s = random::hereditary_sum(&mut random::rng(9, 0), 2, 2, 2, 2, 4)
            .add(&NCSeries::constant(2, linalg::real_mat(2, 2, &[2.0, 1.0, 1.0, 3.0]), 4))
            .unwrap();
        let r = build_realization(&s, 2, &RealizationOptions::default()).unwrap();
        let at0 = r.eval(&MatrixTuple::zeros(1, 2)).unwrap();
        assert!((at0 - linalg::hermitian_part(&s.constant_term())).norm() < 1e-12);
    }

    #[test]
    fn hereditary_sums_are_reconstructed() {
        for seed in 0..6 {
            let s = random::hereditary_sum(&mut random::rng(seed, 0), 2, 2, 3, 2, 6);
            let r = build_realization(&s, 3, &RealizationOptions::default()).unwrap();
            assert!(r.t.iter().all(|(_, c)| c.norm() < 1e-10));
            for len in 0..=3 {
                for word in all_words(2, len) {
                    let got = r.reconstruct_coefficient(&word).unwrap();
                    let want = s.coeff(&word);
                    assert!((&got - &want).norm() <= 1e-8 * (1.0 + want.norm()), "{word}");
                }
            }
            for p in 0..4 {
                let x = point(100 + p, 3, 2, 0.1);
                let a = r.eval(&x).unwrap();
                let b = eval_series(&s, &x).unwrap();
                assert!((a - b).norm() < 1e-10);
            }
            assert!(r.to_series().unwrap().max_coeff_diff(&s) < 1e-9);
        }
    }

    fn all_words(d: usize, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|w| {
                    (0..2 * d).map(move |i| {
                        let mut w2 = w.clone();
                        w2.push(crate::word::Letter::new((i / 2) as u16, i % 2 == 1));
                        w2
                    })
                })
                .collect();
        }
        out
    }

    fn affine() -> NCSeries {
        series("inv(1 - 0.3 x1 - 0.3 x1' - 0.2 x2 - 0.2 x2')", 2, 9)
    }

    #[test]
    fn nonzero_t_reconstruction_and_values() {
        let s = affine();
        let r = build_realization(&s, 3, &RealizationOptions::default()).unwrap();
        assert!(r.t.iter().any(|(_, c)| c.norm() > 1e-3));
        assert_eq!(r.diagnostics.dropped_entries, 0);
        for len in 0..=3 {
            for word in all_words(2, len) {
                let got = r.reconstruct_coefficient(&word).unwrap();
                let want = s.coeff(&word);
                assert!((&got - &want).norm() <= 1e-8 * (1.0 + want.norm()), "{word}");
            }
        }
        for p in 0..5 {
            let x = point(200 + p, 2, 2, 0.05);
            let a = r.eval(&x).unwrap();
            let b = eval_series(&s, &x).unwrap();
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let s = affine();
        let r = build_realization(&s, 3, &RealizationOptions::default()).unwrap();
        for p in 0..4 {
            let x = point(300 + p, 2, 2, 0.1);
            let h = point(400 + p, 2, 2, 1.0);
            let exact = r.hessian(&x, &h).unwrap();
            assert!(linalg::min_eig(&exact) > -1e-8);
            let fd = fd_derivative(&|y| r.eval(y), &x, &h, DerivOp::Hessian, FdConfig::default()).unwrap();
            assert!(agrees(&fd, &exact, 1e-5), "{}", (&fd - &exact).norm());
        }
    }

    #[test]
    fn independent_bases_agree() {
        let s = affine();
        let a = build_realization(&s, 3, &RealizationOptions::default()).unwrap();
        let opts = RealizationOptions { basis_seed: Some(17), ..Default::default() };
        let b = build_realization(&s, 3, &opts).unwrap();
        for len in 2..=3 {
            for word in all_words(2, len) {
                let diff = a.reconstruct_coefficient(&word).unwrap() - b.reconstruct_coefficient(&word).unwrap();
                assert!(diff.norm() < 1e-10);
            }
        }
        let x = point(7, 3, 2, 0.08);
        assert!((a.eval(&x).unwrap() - b.eval(&x).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn growth_is_reported() {
        let s = affine();
        let r = build_realization(&s, 3, &RealizationOptions::default()).unwrap();
        assert!(r.diagnostics.growth.is_finite() && r.diagnostics.growth > 0.0);
    }

    #[test]
    fn errors() {
        let s = series("x1' x1", 1, 3);
        assert!(matches!(
            build_realization(&s, 2, &RealizationOptions::default()),
            Err(Error::TruncationTooDeep { .. })
        ));
        let bad = series("x1 x1' - x1' x1", 1, 4);
        assert!(matches!(build_realization(&bad, 2, &RealizationOptions::default()), Err(Error::GramNotPsd { .. })));
        let r = build_realization(&affine(), 2, &RealizationOptions::default()).unwrap();
        assert!(matches!(r.reconstruct_coefficient(&w("z1* z1 z1 z1")), Err(Error::OutOfTruncation { .. })));
        let far = MatrixTuple::scalar(&[re(5.0), re(5.0)]);
        assert!(matches!(r.eval(&far), Err(Error::TNotContractive { .. })));
    }

    #[test]
    fn json_round_trip() {
        let r = build_realization(&affine(), 2, &RealizationOptions::default()).unwrap();
        let back = Realization::from_json_str(&r.to_json_string()).unwrap();
        let x = point(8, 2, 2, 0.05);
        assert!((r.eval(&x).unwrap() - back.eval(&x).unwrap()).norm() < 1e-12);
        assert_eq!(back.diagnostics, r.diagnostics);
    }

    fn linear(d: usize, rows: usize, cols: usize, terms: &[(&str, CMat)]) -> NCSeries {
        let mut s = NCSeries::zero_rect(d, rows, cols, 2);
        for (word, m) in terms {
            s.add_term(w(word), m.clone());
        }
        s
    }

    #[test]
    fn butterfly_trivial_cases() {
        let one = linalg::eye(1);
        let b = Butterfly::new(
            one.clone(),
            NCSeries::zero(1, 1, 2),
            linear(1, 1, 1, &[("z1", one.clone())]),
            NCSeries::zero(1, 1, 2),
        )
        .unwrap();
        let x = point(10, 3, 1, 0.7);
        let h = point(11, 3, 1, 1.0);
        let z = x.get(0);
        assert!((b.eval(&x).unwrap() - (linalg::eye(3) + z.adjoint() * z)).norm() < 1e-12);
        let want = (h.get(0).adjoint() * h.get(0)).scale(2.0);
        assert!((b.second_derivative(&x, &h).unwrap() - want).norm() < 1e-12);

        let lin = Butterfly::new(
            linalg::zeros(1, 1),
            linear(1, 1, 1, &[("z1", one.clone()), ("z1*", one.clone())]),
            NCSeries::zero_rect(1, 1, 1, 2),
            NCSeries::zero(1, 1, 2),
        )
        .unwrap();
        assert!(lin.second_derivative(&x, &h).unwrap().norm() == 0.0);
    }

    #[test]
    fn butterfly_identity_random() {
        let mut rng = random::rng(12, 0);
        let (hdim, k) = (3, 2);
        let g1 = random::gaussian_mat(&mut rng, hdim, hdim).scale(0.15);
        let gamma = linear(2, hdim, hdim, &[("z1", g1.clone()), ("z1*", g1.adjoint())]);
        let lambda = linear(
            2,
            hdim,
            k,
            &[("z1", random::gaussian_mat(&mut rng, hdim, k)), ("z2*", random::gaussian_mat(&mut rng, hdim, k))],
        );
        let l1 = random::gaussian_mat(&mut rng, k, k);
        let l = linear(2, k, k, &[("z2", l1.clone()), ("z2*", l1.adjoint())]);
        let b = Butterfly::new(linalg::eye(k), l, lambda, gamma).unwrap();
        for p in 0..5 {
            let x = point(500 + p, 2, 2, 0.5);
            let h = point(600 + p, 2, 2, 1.0);
            let exact = b.second_derivative(&x, &h).unwrap();
            let fd = fd_derivative(&|y| b.eval(y), &x, &h, DerivOp::DR2, FdConfig::default()).unwrap();
            assert!(agrees(&fd, &exact, 1e-5));
        }
        let far = MatrixTuple::scalar(&[c(20.0, 0.0), c(0.0, 0.0)]);
        assert!(matches!(b.eval(&far), Err(Error::ResolventSingular { .. })));
    }
}
