//! Transforms of realizations: contraction from a positive denominator,
//! restructuring an affine form into a realization, moving the center, and
//! analytic continuation along steps.
//!
//! An affine form is
//!
//! ```text
//! f(Z) = (v⁺(Z) + v⁻(Z) + v₀)* (1 − T(Z) − T(Z)*)⁻¹ (v⁺(Z) + v⁻(Z) + v₀)
//! ```
//!
//! with `v⁺`, `T` analytic, `v⁻` coanalytic and all three vanishing at the
//! origin. A realization `Re g + [v⁺; v⁻]* [[1, −T], [−T*, 1]]⁻¹ [v⁺; v⁻]` is the
//! affine form with `V⁺ = [v⁺; 0]`, `V⁻ = [0; v⁻]`, `𝒯 = [[0, T], [0, 0]]`
//! plus `Re g`.
//!
//! Centers are scalar points `w·I`; translating a series by a non-scalar tuple
//! is not supported.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::eval_series;
use crate::linalg::{self, CMat};
use crate::random;
use crate::realization::Realization;
use crate::series::NCSeries;
use crate::tuple::{MatrixTuple, TupleJson};
use crate::word::Word;

fn positive_part(a: &CMat, tol: f64) -> Result<CMat> {
    let m = linalg::eye(a.nrows()) - a - a.adjoint();
    let lo = if m.nrows() == 0 { 1.0 } else { linalg::min_eig(&m) };
    if lo <= tol {
        return Err(Error::PreconditionViolated(format!(
            "1 − A − A* is not positive definite (min eigenvalue {lo:.3e})"
        )));
    }
    Ok(m)
}

/// `A(1 − A)⁻¹`, a strict contraction whenever `1 − A − A*` is positive definite.
pub fn schur_contraction(a: &CMat, tol: f64) -> Result<CMat> {
    positive_part(a, tol)?;
    Ok(a * linalg::inverse(&(linalg::eye(a.nrows()) - a))?)
}

#[derive(Clone, Debug)]
pub struct TenIdentities {
    pub values: Vec<CMat>,
    /// `max_i ‖values[i] − values[0]‖_F`.
    pub deviation: f64,
}

/// Evaluates the ten equivalent expressions for `D*(1 − A − A*)⁻¹C`.
pub fn verify_ten_identities(a: &CMat, c: &CMat, d: &CMat, tol: f64) -> Result<TenIdentities> {
    let n = a.nrows();
    if !a.is_square() || c.nrows() != n || d.nrows() != n {
        return Err(Error::DimensionMismatch("A must be square with C, D having as many rows".into()));
    }
    let m = positive_part(a, tol)?;
    let id = linalg::eye(n);
    let left = linalg::inverse(&(&id - a))?;
    let right = linalg::inverse(&(&id - a.adjoint()))?;
    let s = a * &left;
    let s_star = a.adjoint() * &right;
    let mut block = linalg::eye(2 * n);
    block.view_mut((0, n), (n, n)).copy_from(&(-&s));
    block.view_mut((n, 0), (n, n)).copy_from(&(-&s_star));
    let r = linalg::inverse(&block)?;

    let stack = |top: Option<CMat>, bottom: Option<CMat>, cols: usize| {
        let mut v = linalg::zeros(2 * n, cols);
        if let Some(t) = top {
            v.rows_mut(0, n).copy_from(&t);
        }
        if let Some(b) = bottom {
            v.rows_mut(n, n).copy_from(&b);
        }
        v
    };
    let top = |x: &CMat| stack(Some(&left * x), None, x.ncols());
    let bottom = |x: &CMat| stack(None, Some(&right * x), x.ncols());
    let mixed = |x: &CMat| stack(Some(&s * x), Some(&s_star * x), x.ncols());
    let quad = |u: CMat, v: CMat| u.adjoint() * &r * v;
    let dl = d.adjoint() * &left * c;
    let dr = d.adjoint() * &right * c;

    let values = vec![
        d.adjoint() * linalg::inverse(&m)? * c,
        quad(top(d), top(c)),
        quad(bottom(d), top(c)) + &dl,
        quad(top(d), bottom(c)) + &dr,
        quad(bottom(d), bottom(c)),
        quad(mixed(d), top(c)) + &dl,
        quad(mixed(d), bottom(c)) + &dr,
        quad(top(d), mixed(c)) + &dr,
        quad(bottom(d), mixed(c)) + &dl,
        quad(mixed(d), mixed(c)) + &dl + &dr - d.adjoint() * c,
    ];
    let deviation = values[1..].iter().map(|v| (v - &values[0]).norm()).fold(0.0, f64::max);
    Ok(TenIdentities { values, deviation })
}

/// Series data of an affine form; `v₀` is an `h × k` constant.
#[derive(Clone, Debug)]
pub struct AffineRealizationData {
    pub v_plus: NCSeries,
    pub v_minus: NCSeries,
    pub v0: CMat,
    pub t: NCSeries,
}

impl AffineRealizationData {
    pub fn new(v_plus: NCSeries, v_minus: NCSeries, v0: CMat, t: NCSeries) -> Result<Self> {
        let (h, k) = v0.shape();
        let d = v_plus.nvars();
        if v_minus.nvars() != d
            || t.nvars() != d
            || v_plus.rows() != h
            || v_minus.rows() != h
            || v_plus.cols() != k
            || v_minus.cols() != k
            || t.rows() != h
            || t.cols() != h
        {
            return Err(Error::DimensionMismatch("affine realization shapes".into()));
        }
        if !v_plus.is_analytic() || !t.is_analytic() || !v_minus.adjoint().is_analytic() {
            return Err(Error::PreconditionViolated("v⁺, T must be analytic and v⁻ coanalytic".into()));
        }
        for s in [&v_plus, &v_minus, &t] {
            if s.get(&Word::empty()).is_some() {
                return Err(Error::PreconditionViolated("v⁺, v⁻ and T must vanish at 0".into()));
            }
        }
        Ok(AffineRealizationData { v_plus, v_minus, v0, t })
    }

    /// The resolvent part of a realization, with `v₀ = 0`.
    pub fn from_realization(r: &Realization) -> Result<Self> {
        let (d, maxdeg) = (r.d, r.maxdeg);
        let (rp, rm, k) = (r.rank_plus(), r.rank_minus(), r.k);
        let v_plus = NCSeries::vstack(&r.v_plus, &NCSeries::zero_rect(d, rm, k, maxdeg))?;
        let v_minus = NCSeries::vstack(&NCSeries::zero_rect(d, rp, k, maxdeg), &r.v_minus)?;
        let t = NCSeries::block2(
            &NCSeries::zero(d, rp, maxdeg),
            &r.t,
            &NCSeries::zero_rect(d, rm, rp, maxdeg),
            &NCSeries::zero(d, rm, maxdeg),
        )?;
        Self::new(v_plus, v_minus, linalg::zeros(rp + rm, k), t)
    }

    pub fn d(&self) -> usize {
        self.v_plus.nvars()
    }

    pub fn h(&self) -> usize {
        self.v0.nrows()
    }

    pub fn k(&self) -> usize {
        self.v0.ncols()
    }

    pub fn with_maxdeg(&self, maxdeg: usize) -> Self {
        AffineRealizationData {
            v_plus: self.v_plus.with_maxdeg(maxdeg),
            v_minus: self.v_minus.with_maxdeg(maxdeg),
            v0: self.v0.clone(),
            t: self.t.with_maxdeg(maxdeg),
        }
    }

    fn at(&self, z: &MatrixTuple) -> Result<(CMat, CMat, CMat, CMat)> {
        let v0 = linalg::kron(&linalg::eye(z.n()), &self.v0);
        Ok((eval_series(&self.v_plus, z)?, eval_series(&self.v_minus, z)?, v0, eval_series(&self.t, z)?))
    }

    /// `min eig(1 − T(Z) − T(Z)*)`.
    pub fn indicator(&self, z: &MatrixTuple) -> Result<f64> {
        let t = eval_series(&self.t, z)?;
        let m = linalg::eye(t.nrows()) - &t - t.adjoint();
        Ok(if m.nrows() == 0 { 1.0 } else { linalg::min_eig(&m) })
    }

    pub fn eval(&self, z: &MatrixTuple) -> Result<CMat> {
        let (vp, vm, v0, t) = self.at(z)?;
        let m = positive_part(&t, 0.0)?;
        let v = vp + vm + v0;
        Ok(v.adjoint() * linalg::inverse(&m)? * v)
    }
}

/// Realization data evaluated at one point.
#[derive(Clone, Debug)]
pub struct PointwiseRealization {
    pub g: CMat,
    pub v_plus: CMat,
    pub v_minus: CMat,
    pub t: CMat,
}

impl PointwiseRealization {
    /// `Re g + [v⁺; v⁻]* [[1, −T], [−T*, 1]]⁻¹ [v⁺; v⁻]`.
    pub fn value(&self) -> Result<CMat> {
        let (p, m) = (self.v_plus.nrows(), self.v_minus.nrows());
        let mut block = linalg::eye(p + m);
        block.view_mut((0, p), (p, m)).copy_from(&(-&self.t));
        block.view_mut((p, 0), (m, p)).copy_from(&(-self.t.adjoint()));
        let mut v = linalg::zeros(p + m, self.v_plus.ncols());
        v.rows_mut(0, p).copy_from(&self.v_plus);
        v.rows_mut(p, m).copy_from(&self.v_minus);
        Ok(linalg::hermitian_part(&self.g) + v.adjoint() * linalg::inverse(&block)? * v)
    }
}

/// Restructured data at the point `Z`, using exact matrix inverses.
pub fn restructure_at(data: &AffineRealizationData, z: &MatrixTuple) -> Result<PointwiseRealization> {
    let (vp, vm, v0, t) = data.at(z)?;
    positive_part(&t, 0.0)?;
    let id = linalg::eye(t.nrows());
    let left = linalg::inverse(&(&id - &t))?;
    let right = linalg::inverse(&(&id - t.adjoint()))?;
    Ok(PointwiseRealization {
        g: ((&vm + &v0).adjoint() * &left * (&vp + &v0)).scale(2.0) - v0.adjoint() * &v0,
        v_plus: &left * (&vp + &t * &v0),
        v_minus: &right * (&vm + t.adjoint() * &v0),
        t: &t * &left,
    })
}

/// Series-level restructuring with `(1 − T)⁻¹` expanded to the data's `maxdeg`.
/// The result is a realization centered at `center`.
pub fn restructure(data: &AffineRealizationData, center: Vec<Complex64>) -> Result<Realization> {
    let d = data.d();
    let maxdeg = data.t.maxdeg();
    let neumann = data.t.neumann()?;
    let v0 = NCSeries::constant(d, data.v0.clone(), maxdeg);
    let v_plus = neumann.mul(&data.v_plus.add(&data.t.right_mul_const(&data.v0)?)?)?;
    let v_minus = neumann.adjoint().mul(&data.v_minus.add(&data.t.adjoint().right_mul_const(&data.v0)?)?)?;
    let t = data.t.mul(&neumann)?;
    let g = data
        .v_minus
        .add(&v0)?
        .adjoint()
        .mul(&neumann.mul(&data.v_plus.add(&v0)?)?)?
        .scale(linalg::re(2.0))
        .sub(&NCSeries::constant(d, data.v0.adjoint() * &data.v0, maxdeg))?;
    Realization::from_parts(maxdeg, center, g, v_plus, v_minus, t)
}

/// Reads a tuple of scalar multiples of the identity as a scalar point.
pub fn scalar_center(w: &MatrixTuple) -> Result<Vec<Complex64>> {
    let n = w.n();
    w.mats()
        .iter()
        .map(|m| {
            let z = if n == 0 { linalg::ZERO } else { m[(0, 0)] };
            let off = (m - linalg::eye(n).map(|e| e * z)).norm();
            if off > 1e-14 * (1.0 + z.norm()) {
                Err(Error::Unsupported("centers must be scalar points w·I".into()))
            } else {
                Ok(z)
            }
        })
        .collect()
}

/// Recenters the affine form at the scalar point `w`:
/// `u = √(1 − T(w) − T(w)*)`, `T̂ = u⁻¹(T(·+w) − T(w))u⁻¹`,
/// `v̂± = u⁻¹(v±(·+w) − v±(w))`, `v̂₀ = u⁻¹(v⁺(w) + v⁻(w) + v₀)`.
pub fn movecenter(data: &AffineRealizationData, w: &[Complex64]) -> Result<AffineRealizationData> {
    let point = MatrixTuple::scalar(w);
    let tw = eval_series(&data.t, &point)?;
    let u = linalg::hermitian_sqrt(&positive_part(&tw, 0.0)?)?;
    let uinv = linalg::inverse(&u)?;
    let shift = |s: &NCSeries| -> Result<(NCSeries, CMat)> {
        let moved = s.translate(w)?;
        let at = moved.constant_term();
        let centered = moved.filter(|w| !w.is_empty());
        Ok((centered, at))
    };
    let (t, _) = shift(&data.t)?;
    let (vp, vp_w) = shift(&data.v_plus)?;
    let (vm, vm_w) = shift(&data.v_minus)?;
    AffineRealizationData::new(
        vp.left_mul_const(&uinv)?,
        vm.left_mul_const(&uinv)?,
        &uinv * (vp_w + vm_w + &data.v0),
        t.left_mul_const(&uinv)?.right_mul_const(&uinv)?,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentReport {
    /// `min_t (1 − ‖T(tw)‖)` over the sampled parameters.
    pub min_indicator: f64,
    /// Parameter where the indicator first drops below the tolerance.
    pub first_invalid: Option<f64>,
    pub valid: bool,
}

/// Probes `1 − ‖T(t·w)‖` along `t ∈ [0, 1]`, bisecting at the first failure.
pub fn segment_validity(r: &Realization, w: &[Complex64], tol: f64) -> Result<SegmentReport> {
    const SAMPLES: usize = 32;
    let indicator = |t: f64| -> Result<f64> {
        let p: Vec<Complex64> = w.iter().map(|z| z * t).collect();
        Ok(1.0 - linalg::op_norm(&eval_series(&r.t, &MatrixTuple::scalar(&p))?))
    };
    let mut min_indicator = f64::INFINITY;
    let mut prev = 0.0;
    for j in 0..=SAMPLES {
        let t = j as f64 / SAMPLES as f64;
        let v = indicator(t)?;
        min_indicator = min_indicator.min(v);
        if v < tol {
            let (mut lo, mut hi) = (prev, t);
            for _ in 0..40 {
                let mid = 0.5 * (lo + hi);
                if indicator(mid)? < tol {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(SegmentReport { min_indicator, first_invalid: Some(hi), valid: false });
        }
        prev = t;
    }
    Ok(SegmentReport { min_indicator, first_invalid: None, valid: true })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationOptions {
    /// Truncation degree of the continued data; defaults to the input's.
    pub order: Option<usize>,
    /// Rejection threshold for `1 − ‖T‖` along the step.
    pub tol: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { order: None, tol: 1e-3 }
    }
}

/// Recenters `r` at `r.center + w`: move the center, restructure, and add
/// the translated pluriharmonic part.
pub fn continuation_step(r: &Realization, w: &[Complex64], opts: &ContinuationOptions) -> Result<Realization> {
    if w.len() != r.d {
        return Err(Error::DimensionMismatch(format!("step has {} entries, realization has d = {}", w.len(), r.d)));
    }
    let segment = segment_validity(r, w, opts.tol)?;
    if !segment.valid {
        return Err(Error::PreconditionViolated(format!(
            "step leaves the region where T is contractive (at t = {:.4})",
            segment.first_invalid.unwrap_or(1.0)
        )));
    }
    let order = opts.order.unwrap_or(r.maxdeg);
    let data = AffineRealizationData::from_realization(r)?.with_maxdeg(order);
    let moved = movecenter(&data, w)?;
    let center: Vec<Complex64> = r.center.iter().zip(w).map(|(a, b)| a + b).collect();
    let mut out = restructure(&moved, center.clone())?;
    let g = r.g.with_maxdeg(order).translate(w)?.add(&out.g)?;
    out = Realization::from_parts(order, center, g, out.v_plus, out.v_minus, out.t)?;
    Ok(out)
}

/// One step of a path: a scalar tuple plus an optional tolerance override.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathStep {
    #[serde(flatten)]
    pub step: TupleJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSpec {
    pub steps: Vec<PathStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub index: usize,
    pub center: Vec<[f64; 2]>,
    pub segment: SegmentReport,
    /// Largest `‖old − new‖_F` at sampled points where both evaluate.
    pub overlap_deviation: Option<f64>,
    pub overlap_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub steps: Vec<StepReport>,
    pub completed: bool,
    pub max_overlap_deviation: f64,
}

/// Evaluates two realizations at points scattered around `anchor` and
/// returns the largest deviation where both are defined.
pub fn overlap_deviation(
    a: &Realization,
    b: &Realization,
    anchor: &[Complex64],
    radius: f64,
    samples: usize,
    seed: u64,
) -> Result<(Option<f64>, usize)> {
    let mut worst: Option<f64> = None;
    let mut used = 0;
    for s in 0..samples {
        let mut rng = random::rng(seed, s as u64);
        let x = MatrixTuple::scalar_point(2, anchor).add(&random::tuple_in_ball(&mut rng, 2, a.d, radius))?;
        match (a.eval(&x), b.eval(&x)) {
            (Ok(u), Ok(v)) => {
                let dev = (u - v).norm();
                worst = Some(worst.map_or(dev, |w| w.max(dev)));
                used += 1;
            }
            (Err(Error::TNotContractive { .. }), _) | (_, Err(Error::TNotContractive { .. })) => {}
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok((worst, used))
}

/// Continues `r` along the steps of `path`, checking overlap consistency
/// around the midpoint of every step.
pub fn continue_path(
    r: &Realization,
    path: &PathSpec,
    opts: &ContinuationOptions,
    samples: usize,
    seed: u64,
) -> Result<(ContinuationReport, Realization)> {
    let mut current = r.clone();
    let mut steps = Vec::new();
    let mut completed = true;
    let mut max_dev: f64 = 0.0;
    for (index, step) in path.steps.iter().enumerate() {
        let w = scalar_center(&MatrixTuple::from_json(&step.step)?)?;
        let local = ContinuationOptions { tol: step.tol.unwrap_or(opts.tol), ..*opts };
        let segment = segment_validity(&current, &w, local.tol)?;
        if !segment.valid {
            steps.push(StepReport {
                index,
                center: linalg::json::vector(&current.center),
                segment,
                overlap_deviation: None,
                overlap_samples: 0,
            });
            completed = false;
            break;
        }
        let next = continuation_step(&current, &w, &local)?;
        let anchor: Vec<Complex64> = current.center.iter().zip(&w).map(|(a, b)| a + b * 0.5).collect();
        let radius = 0.25 * w.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1e-3;
        let (dev, used) = overlap_deviation(&current, &next, &anchor, radius, samples, seed + index as u64)?;
        if let Some(dv) = dev {
            max_dev = max_dev.max(dv);
        }
        steps.push(StepReport {
            index,
            center: linalg::json::vector(&next.center),
            segment,
            overlap_deviation: dev,
            overlap_samples: used,
        });
        current = next;
    }
    Ok((ContinuationReport { steps, completed, max_overlap_deviation: max_dev }, current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{expand, parse};
    use crate::linalg::{c, re};
    use crate::realization::{build_realization, RealizationOptions};
    use crate::word::w as word;

    fn scalar(x: f64) -> CMat {
        CMat::from_element(1, 1, re(x))
    }

    #[test]
    fn contraction_examples() {
        assert_eq!(schur_contraction(&scalar(0.0), 1e-12).unwrap(), scalar(0.0));
        let s = schur_contraction(&scalar(0.4), 1e-12).unwrap();
        assert!((s[(0, 0)].re - 2.0 / 3.0).abs() < 1e-15);
        assert!(schur_contraction(&scalar(0.5), 1e-12).is_err());
        for seed in 0..50 {
            let mut r = random::rng(seed, 0);
            let n = 1 + (seed as usize % 6);
            let a = random::denominator_a(&mut r, n);
            assert!(linalg::op_norm(&schur_contraction(&a, 1e-12).unwrap()) < 1.0 - 1e-12);
        }
    }

    #[test]
    fn ten_identities_scalar() {
        let t = verify_ten_identities(&scalar(0.3), &scalar(1.0), &scalar(1.0), 1e-12).unwrap();
        for v in &t.values {
            assert!((v[(0, 0)] - re(2.5)).norm() < 1e-13);
        }
        let zero = verify_ten_identities(&scalar(0.0), &scalar(2.0), &scalar(3.0), 1e-12).unwrap();
        assert!(zero.deviation < 1e-15);
        assert!((zero.values[0][(0, 0)] - re(6.0)).norm() < 1e-15);
    }

    #[test]
    fn ten_identities_random() {
        for seed in 0..40 {
            let mut r = random::rng(seed, 1);
            let a = random::denominator_a(&mut r, 4);
            let cm = random::gaussian_mat(&mut r, 4, 2);
            let dm = random::gaussian_mat(&mut r, 4, 2);
            let t = verify_ten_identities(&a, &cm, &dm, 1e-12).unwrap();
            let scale = (1.0 + linalg::op_norm(&a)) * cm.norm() * dm.norm();
            assert!(t.deviation < 1e-10 * scale.max(1.0), "{}", t.deviation);
        }
    }

    fn series(text: &str, d: usize, maxdeg: usize) -> NCSeries {
        expand(&parse(text).unwrap(), d, maxdeg).unwrap()
    }

    fn affine_scalar(tcoef: Complex64, maxdeg: usize) -> AffineRealizationData {
        let t = NCSeries::monomial(1, word("z1"), CMat::from_element(1, 1, tcoef), maxdeg);
        AffineRealizationData::new(
            NCSeries::monomial(1, word("z1"), scalar(1.0), maxdeg),
            NCSeries::zero(1, 1, maxdeg),
            scalar(0.0),
            t,
        )
        .unwrap()
    }

    #[test]
    fn restructure_identity_cases() {
        let d = AffineRealizationData::new(
            series("x1", 1, 4),
            series("0.5 x1'", 1, 4),
            scalar(0.0),
            NCSeries::zero(1, 1, 4),
        )
        .unwrap();
        let r = restructure(&d, vec![re(0.0)]).unwrap();
        assert!(r.t.is_zero());
        assert_eq!(r.v_plus, d.v_plus);
        assert_eq!(r.v_minus, d.v_minus);
        assert!(r.g.max_coeff_diff(&series("x1 x1", 1, 4)) < 1e-15);
        let x = MatrixTuple::new(vec![CMat::from_fn(2, 2, |i, j| c(0.1 * i as f64, 0.2 * j as f64))]).unwrap();
        assert!((r.eval(&x).unwrap() - d.eval(&x).unwrap()).norm() < 1e-12);

        let d = AffineRealizationData::new(
            NCSeries::zero(1, 1, 30),
            NCSeries::zero(1, 1, 30),
            scalar(1.0),
            NCSeries::monomial(1, word("z1"), scalar(0.3), 30),
        )
        .unwrap();
        let z = MatrixTuple::scalar(&[c(0.4, -0.7)]);
        let p = restructure_at(&d, &z).unwrap();
        let zz = c(0.4, -0.7);
        let want = 1.0 / (1.0 - 0.6 * zz.re);
        assert!((p.value().unwrap()[(0, 0)] - re(want)).norm() < 1e-12);
        let r = restructure(&d, vec![re(0.0)]).unwrap();
        assert!((r.eval(&z).unwrap()[(0, 0)] - re(want)).norm() < 1e-10);
    }

    #[test]
    fn restructure_pointwise_random() {
        for seed in 0..10 {
            let mut rng = random::rng(seed, 2);
            let (h, k) = (3, 2);
            let vp = random::analytic_polynomial(&mut rng, 2, h, k, 1, 2, 3, 4);
            let vm = random::analytic_polynomial(&mut rng, 2, k, h, 1, 2, 3, 4).adjoint();
            let t = random::analytic_polynomial(&mut rng, 2, h, h, 1, 2, 3, 4).scale(re(0.3));
            let v0 = random::gaussian_mat(&mut rng, h, k);
            let d = AffineRealizationData::new(vp, vm, v0, t).unwrap();
            let z = random::tuple_in_ball(&mut rng, 2, 2, 0.3);
            if d.indicator(&z).unwrap() <= 0.0 {
                continue;
            }
            let p = restructure_at(&d, &z).unwrap();
            assert!(linalg::op_norm(&p.t) < 1.0);
            assert!((p.value().unwrap() - d.eval(&z).unwrap()).norm() < 1e-8);
        }
    }

    #[test]
    fn movecenter_scalar_case() {
        let d = affine_scalar(re(0.3), 12);
        let w = [c(0.2, 0.1)];
        let moved = movecenter(&d, &w).unwrap();
        for s in [&moved.v_plus, &moved.v_minus, &moved.t] {
            assert!(s.get(&Word::empty()).is_none());
        }
        for seed in 0..5 {
            let z = random::tuple_in_ball(&mut random::rng(seed, 3), 2, 1, 0.2);
            let shifted = z.add(&MatrixTuple::scalar_point(2, &w)).unwrap();
            assert!((moved.eval(&z).unwrap() - d.eval(&shifted).unwrap()).norm() < 1e-10);
        }
        let unchanged = movecenter(&d, &[re(0.0)]).unwrap();
        assert_eq!(unchanged.t, d.t);
        assert_eq!(unchanged.v0, scalar(0.0));
    }

    #[test]
    fn non_scalar_centers_are_rejected() {
        let w = MatrixTuple::new(vec![linalg::real_mat(2, 2, &[0.0, 1.0, 0.0, 0.0])]).unwrap();
        assert!(matches!(scalar_center(&w), Err(Error::Unsupported(_))));
        assert_eq!(scalar_center(&MatrixTuple::scalar_point(3, &[c(1.0, 2.0)])).unwrap(), vec![c(1.0, 2.0)]);
    }

    fn affine_function() -> NCSeries {
        series("inv(1 - 0.3 x1 - 0.3 x1')", 1, 8)
    }

    #[test]
    fn continuation_zero_step_and_square() {
        let r = build_realization(&affine_function(), 3, &RealizationOptions::default()).unwrap();
        let same = continuation_step(&r, &[re(0.0)], &ContinuationOptions::default()).unwrap();
        let x = random::tuple_in_ball(&mut random::rng(1, 4), 2, 1, 0.1);
        assert!((same.eval(&x).unwrap() - r.eval(&x).unwrap()).norm() < 1e-10);

        let sq = build_realization(&series("x1' x1", 1, 4), 2, &RealizationOptions::default()).unwrap();
        let moved = continuation_step(&sq, &[c(0.7, -0.4)], &ContinuationOptions::default()).unwrap();
        let x = random::tuple_in_ball(&mut random::rng(2, 4), 3, 1, 2.0);
        let z = x.get(0);
        assert!((moved.eval(&x).unwrap() - z.adjoint() * z).norm() < 1e-10);
    }

    #[test]
    fn continuation_path_independence() {
        let r = build_realization(&affine_function(), 3, &RealizationOptions::default()).unwrap();
        let opts = ContinuationOptions { order: Some(40), tol: 1e-3 };
        let (w1, w2) = (c(0.15, 0.1), c(0.1, -0.2));
        let two = continuation_step(&continuation_step(&r, &[w1], &opts).unwrap(), &[w2], &opts).unwrap();
        let one = continuation_step(&r, &[w1 + w2], &opts).unwrap();
        let center = [w1 + w2];
        let (dev, used) = overlap_deviation(&one, &two, &center, 0.05, 6, 11).unwrap();
        assert_eq!(used, 6);
        assert!(dev.unwrap() < 1e-7, "{dev:?}");
        let exact = |x: &MatrixTuple| {
            let z = x.get(0);
            let m = linalg::eye(z.nrows()) - z.scale(0.3) - z.adjoint().scale(0.3);
            linalg::inverse(&m).unwrap()
        };
        let x = MatrixTuple::scalar_point(2, &center)
            .add(&random::tuple_in_ball(&mut random::rng(5, 5), 2, 1, 0.05))
            .unwrap();
        let err = (two.eval(&x).unwrap() - exact(&x)).norm();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn path_report() {
        let r = build_realization(&affine_function(), 3, &RealizationOptions::default()).unwrap();
        let step = |z: Complex64| PathStep { step: MatrixTuple::scalar(&[z]).to_json(), tol: None };
        let path = PathSpec { steps: vec![step(c(0.1, 0.0)), step(c(0.0, 0.1))] };
        let opts = ContinuationOptions { order: Some(30), tol: 1e-3 };
        let (report, last) = continue_path(&r, &path, &opts, 4, 3).unwrap();
        assert!(report.completed);
        assert!(report.max_overlap_deviation < 1e-7);
        assert!((last.center[0] - c(0.1, 0.1)).norm() < 1e-15);
        let far = PathSpec { steps: vec![step(c(5.0, 0.0))] };
        let (report, _) = continue_path(&r, &far, &opts, 4, 3).unwrap();
        assert!(!report.completed);
        assert!(report.steps[0].segment.first_invalid.is_some());
    }
}
