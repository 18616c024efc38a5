//! Numerical experiments around analytic continuation of free functions:
//! the matrix logarithm of `f(z) = [[1, z], [z, 1 + z²]]`, the
//! Baker–Campbell–Hausdorff series, the triangular similarity identity and
//! rotated direct sums of two paths.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{eval_expr, eval_series};
use crate::expr::{expand, parse, Expr};
use crate::linalg::{self, c, CMat, ONE, ZERO};
use crate::random;
use crate::series::NCSeries;
use crate::tuple::MatrixTuple;

type Poly = Vec<BigInt>;

fn shift(p: &Poly, by: usize) -> Poly {
    let mut out = vec![BigInt::zero(); by];
    out.extend(p.iter().cloned());
    out
}

fn add_poly(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

fn lcm_upto(n: usize) -> BigInt {
    let mut l = BigInt::one();
    for m in 2..=n {
        let m = BigInt::from(m);
        let g = gcd(&l, &m);
        l = l * &m / g;
    }
    l
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.clone(), b.clone());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Exact coefficients `c_0, ..., c_n` of `log f(z) = Σ (−1)^{j+1}/j · M(z)^j`
/// with `M(z) = [[0, z], [z, z²]]`, as `numerators / denominator`.
pub struct LogCoefficients {
    pub numerators: Vec<[[BigInt; 2]; 2]>,
    pub denominator: BigInt,
}

impl LogCoefficients {
    pub fn compute(n: usize) -> Self {
        let denominator = lcm_upto(n.max(1));
        let mut numerators: Vec<[[BigInt; 2]; 2]> = (0..=n).map(|_| Default::default()).collect();
        let z = |d: usize| {
            let mut p = vec![BigInt::zero(); d + 1];
            p[d] = BigInt::one();
            p
        };
        let mut power: [[Poly; 2]; 2] = [[vec![], z(1)], [z(1), z(2)]];
        for j in 1..=n {
            let weight = &denominator / BigInt::from(j);
            let weight = if j % 2 == 1 { weight } else { -weight };
            for (i, row) in power.iter().enumerate() {
                for (k, p) in row.iter().enumerate() {
                    for (m, a) in p.iter().enumerate().take(n + 1) {
                        if !a.is_zero() {
                            numerators[m][i][k] += a * &weight;
                        }
                    }
                }
            }
            let next = [
                [shift(&power[0][1], 1), add_poly(&shift(&power[0][0], 1), &shift(&power[0][1], 2))],
                [shift(&power[1][1], 1), add_poly(&shift(&power[1][0], 1), &shift(&power[1][1], 2))],
            ];
            power = next;
        }
        LogCoefficients { numerators, denominator }
    }

    pub fn matrix(&self, m: usize) -> CMat {
        let to =
            |x: &BigInt| linalg::re(BigRational::new(x.clone(), self.denominator.clone()).to_f64().unwrap_or(f64::NAN));
        let a = &self.numerators[m];
        CMat::from_row_slice(2, 2, &[to(&a[0][0]), to(&a[0][1]), to(&a[1][0]), to(&a[1][1])])
    }

    /// Whether `tr c_m` vanishes exactly for every `m ≥ 1`.
    pub fn traces_vanish(&self) -> bool {
        self.numerators.iter().skip(1).all(|a| (&a[0][0] + &a[1][1]).is_zero())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootSample {
    pub n: usize,
    pub norm: f64,
    pub root: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRadiusReport {
    #[serde(rename = "N")]
    pub n: usize,
    /// `c_m` as real 2×2 matrices, row-major.
    pub coefficients: Vec<[f64; 4]>,
    pub root_test: Vec<RootSample>,
    pub window: [usize; 2],
    /// Geometric mean of `‖c_m‖^{1/m}` over the window.
    pub estimate: f64,
    /// `exp` of the least-squares slope of `log ‖c_m‖` over the window.
    pub slope_estimate: f64,
    pub radius: f64,
    pub max_abs_trace: f64,
    pub trace_exactly_zero: bool,
}

impl LogRadiusReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,norm,root\n");
        for s in &self.root_test {
            out.push_str(&format!("{},{:e},{}\n", s.n, s.norm, s.root));
        }
        out
    }

    pub fn coefficient(&self, m: usize) -> CMat {
        let a = self.coefficients[m];
        CMat::from_row_slice(2, 2, &[re(a[0]), re(a[1]), re(a[2]), re(a[3])])
    }
}

fn re(x: f64) -> Complex64 {
    linalg::re(x)
}

pub fn log_radius_experiment(n: usize) -> Result<LogRadiusReport> {
    if n < 10 {
        return Err(Error::PreconditionViolated("the log-radius experiment needs N ≥ 10".into()));
    }
    let exact = LogCoefficients::compute(n);
    let mats: Vec<CMat> = (0..=n).map(|m| exact.matrix(m)).collect();
    let coefficients = mats.iter().map(|m| [m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re, m[(1, 1)].re]).collect();
    let root_test: Vec<RootSample> = (1..=n)
        .map(|m| {
            let norm = linalg::op_norm(&mats[m]);
            RootSample { n: m, norm, root: norm.powf(1.0 / m as f64) }
        })
        .collect();
    let window = [n / 2, n];
    let inside: Vec<&RootSample> =
        root_test.iter().filter(|s| s.n >= window[0] && s.n <= window[1] && s.norm > 0.0).collect();
    let count = inside.len() as f64;
    let estimate = (inside.iter().map(|s| s.norm.ln() / s.n as f64).sum::<f64>() / count).exp();
    let mean_n = inside.iter().map(|s| s.n as f64).sum::<f64>() / count;
    let mean_l = inside.iter().map(|s| s.norm.ln()).sum::<f64>() / count;
    let (num, den) = inside.iter().fold((0.0, 0.0), |(a, b), s| {
        let dn = s.n as f64 - mean_n;
        (a + dn * (s.norm.ln() - mean_l), b + dn * dn)
    });
    let max_abs_trace = mats.iter().skip(1).map(|m| (m[(0, 0)] + m[(1, 1)]).norm()).fold(0.0, f64::max);
    Ok(LogRadiusReport {
        n,
        coefficients,
        root_test,
        window,
        estimate,
        slope_estimate: (num / den).exp(),
        radius: 1.0 / estimate,
        max_abs_trace,
        trace_exactly_zero: exact.traces_vanish(),
    })
}

/// Norms of the partial sums `Σ_{m ≤ j} c_m z^m`, for `j = 0..`.
pub fn partial_sum_norms(coefficients: &[CMat], z: Complex64) -> Vec<f64> {
    let mut acc = linalg::zeros(2, 2);
    let mut zp = ONE;
    coefficients
        .iter()
        .map(|m| {
            acc += m.map(|e| e * zp);
            zp *= z;
            acc.norm()
        })
        .collect()
}

/// `log(exp(x1) exp(x2))` truncated at `maxdeg`.
pub fn bch_series(maxdeg: usize) -> Result<NCSeries> {
    expand(&parse("log(exp(x1) exp(x2))")?, 2, maxdeg)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BchSample {
    pub norm_sum: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BchReport {
    pub maxdeg: usize,
    pub terms: usize,
    pub degree_one_exact: bool,
    pub degree_two_exact: bool,
    pub samples: Vec<BchSample>,
    pub max_error: f64,
    /// Errors at growing `‖X‖ + ‖Y‖`, past the convergence bound.
    pub sweep: Vec<BchSample>,
    /// First swept `‖X‖ + ‖Y‖` whose error exceeds `1e−4`.
    pub crossover: Option<f64>,
}

/// `(log 2)/2`, the guaranteed convergence bound for `‖X‖ + ‖Y‖`.
pub fn bch_bound() -> f64 {
    std::f64::consts::LN_2 / 2.0
}

fn bch_error(s: &NCSeries, x: &CMat, y: &CMat) -> Result<f64> {
    let p = MatrixTuple::new(vec![x.clone(), y.clone()])?;
    let exact = linalg::principal_log(&(linalg::matrix_exp(x) * linalg::matrix_exp(y)))?;
    Ok((eval_series(s, &p)? - exact).norm())
}

pub fn bch_check(maxdeg: usize, samples: usize, seed: u64) -> Result<BchReport> {
    let s = bch_series(maxdeg)?;
    let coeff = |w: &str| s.coeff(&w.parse().expect("word")).map(|z| z.re)[(0, 0)];
    let degree_one_exact = coeff("z1") == 1.0 && coeff("z2") == 1.0;
    let degree_two_exact = coeff("z1 z2") == 0.5
        && coeff("z2 z1") == -0.5
        && s.get(&"z1 z1".parse()?).is_none()
        && s.get(&"z2 z2".parse()?).is_none();
    let half = bch_bound() / 2.0;
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut r = random::rng(seed, i as u64);
        let n = 2 + i % 3;
        let x = random::in_ball(&mut r, n, half);
        let y = random::in_ball(&mut r, n, half);
        out.push(BchSample { norm_sum: linalg::op_norm(&x) + linalg::op_norm(&y), error: bch_error(&s, &x, &y)? });
    }
    let mut sweep = Vec::new();
    let mut r = random::rng(seed, u64::MAX);
    let (x0, y0) = (random::ginibre(&mut r, 3), random::ginibre(&mut r, 3));
    let (nx, ny) = (linalg::op_norm(&x0), linalg::op_norm(&y0));
    for step in 1..=24 {
        let total = bch_bound() * step as f64 * 0.5;
        let x = x0.scale(total / 2.0 / nx);
        let y = y0.scale(total / 2.0 / ny);
        if let Ok(error) = bch_error(&s, &x, &y) {
            sweep.push(BchSample { norm_sum: total, error });
        }
    }
    let crossover = sweep.iter().find(|s| s.error > 1e-4).map(|s| s.norm_sum);
    Ok(BchReport {
        maxdeg,
        terms: s.len(),
        degree_one_exact,
        degree_two_exact,
        max_error: out.iter().map(|s| s.error).fold(0.0, f64::max),
        samples: out,
        sweep,
        crossover,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub degree: usize,
    pub inside: [f64; 2],
    pub outside: [f64; 2],
    pub max_partial_inside: f64,
    pub max_partial_outside: f64,
    pub diverges: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MartinShamovichReport {
    pub maxdeg: usize,
    pub product_matches: bool,
    pub matched_through: usize,
    pub max_deviation: f64,
    pub divergence: Divergence,
}

/// The nilpotent substitution `X = [[0,0],[z,0]]`, `Y = [[0,z],[0,0]]`.
pub fn martin_shamovich_point(z: Complex64) -> MatrixTuple {
    MatrixTuple::new(vec![
        CMat::from_row_slice(2, 2, &[ZERO, ZERO, z, ZERO]),
        CMat::from_row_slice(2, 2, &[ZERO, z, ZERO, ZERO]),
    ])
    .expect("2x2")
}

/// Substitutes the nilpotent pair into the BCH series and compares the
/// resulting `z`-coefficients with the exact log coefficients.
pub fn martin_shamovich_check(maxdeg: usize, divergence_degree: usize) -> Result<MartinShamovichReport> {
    let s = bch_series(maxdeg)?;
    let unit = martin_shamovich_point(ONE);
    let mut by_degree = vec![linalg::zeros(2, 2); maxdeg + 1];
    let mut powers = crate::eval::WordPowers::new(&unit);
    for (w, coeff) in s.iter() {
        by_degree[w.len()] += powers.get(w).map(|e| e * coeff[(0, 0)]);
    }
    let exact = LogCoefficients::compute(maxdeg.max(divergence_degree));
    let mut matched_through = 0;
    let mut max_deviation: f64 = 0.0;
    for (m, sub) in by_degree.iter().enumerate() {
        let dev = (sub - exact.matrix(m)).norm();
        max_deviation = max_deviation.max(dev);
        if dev <= 1e-10 && matched_through + 1 == m {
            matched_through = m;
        }
    }
    let z = c(0.7, -0.3);
    let p = martin_shamovich_point(z);
    let product = linalg::matrix_exp(p.get(0)) * linalg::matrix_exp(p.get(1));
    let f = CMat::from_row_slice(2, 2, &[ONE, z, z, ONE + z * z]);
    let product_matches = (product - f).norm() < 1e-14;

    let coefficients: Vec<CMat> = (0..=divergence_degree).map(|m| exact.matrix(m)).collect();
    let (zi, zo) = (c(0.0, 1.8), c(0.0, 2.2));
    let max_partial = |z| partial_sum_norms(&coefficients, z).into_iter().fold(0.0, f64::max);
    let (inside, outside) = (max_partial(zi), max_partial(zo));
    Ok(MartinShamovichReport {
        maxdeg,
        product_matches,
        matched_through,
        max_deviation,
        divergence: Divergence {
            degree: divergence_degree,
            inside: [zi.re, zi.im],
            outside: [zo.re, zo.im],
            max_partial_inside: inside,
            max_partial_outside: outside,
            diverges: outside > 10.0 * inside,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangularReport {
    pub deviation: f64,
    /// `max(1, ‖f(X)‖, ‖f(Y)‖)`.
    pub scale: f64,
}

impl TriangularReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.deviation <= tol * self.scale
    }
}

/// `[[X_i, c(X_i − Y_i)], [0, Y_i]]`.
pub fn triangular_point(x: &MatrixTuple, y: &MatrixTuple, cc: Complex64) -> Result<MatrixTuple> {
    if x.d() != y.d() || x.n() != y.n() {
        return Err(Error::DimensionMismatch("X and Y must have the same shape".into()));
    }
    let n = x.n();
    let mats = x
        .mats()
        .iter()
        .zip(y.mats())
        .map(|(a, b)| {
            let mut m = linalg::zeros(2 * n, 2 * n);
            m.view_mut((0, 0), (n, n)).copy_from(a);
            m.view_mut((0, n), (n, n)).copy_from(&(a - b).map(|e| e * cc));
            m.view_mut((n, n), (n, n)).copy_from(b);
            m
        })
        .collect();
    MatrixTuple::new(mats)
}

/// Checks `f([[X, c(X−Y)], [0, Y]]) = [[f(X), c(f(X)−f(Y))], [0, f(Y)]]`.
pub fn triangular_continuation_check(
    e: &Expr,
    x: &MatrixTuple,
    y: &MatrixTuple,
    cc: Complex64,
) -> Result<TriangularReport> {
    if !e.is_analytic() {
        return Err(Error::PreconditionViolated("the similarity identity needs an analytic expression".into()));
    }
    let fx = eval_expr(e, x)?;
    let fy = eval_expr(e, y)?;
    let big = eval_expr(e, &triangular_point(x, y, cc)?)?;
    let m = fx.nrows();
    let mut want = linalg::zeros(2 * m, 2 * m);
    want.view_mut((0, 0), (m, m)).copy_from(&fx);
    want.view_mut((0, m), (m, m)).copy_from(&(&fx - &fy).map(|z| z * cc));
    want.view_mut((m, m), (m, m)).copy_from(&fy);
    Ok(TriangularReport {
        deviation: linalg::max_abs(&(big - want)),
        scale: 1f64.max(linalg::max_abs(&fx)).max(linalg::max_abs(&fy)),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SphereSample {
    pub t_index: usize,
    pub angle: f64,
    pub point: MatrixTuple,
}

/// Rotated direct sums `U (γ₁(t) ⊕ γ₂(t)) U*` with `U = [[a, b], [−b, a]]`,
/// `a = cos θ`, `b = sin θ`, for `grid` angles in `[0, 2π)`.
pub fn so2_sphere_samples(g1: &[MatrixTuple], g2: &[MatrixTuple], grid: usize) -> Result<Vec<SphereSample>> {
    if g1.len() != g2.len() || g1.len() < 2 {
        return Err(Error::PreconditionViolated("paths need the same number (≥ 2) of samples".into()));
    }
    let gap = |a: &MatrixTuple, b: &MatrixTuple| -> Result<f64> { Ok(a.sub(b)?.norm()) };
    let deviation = gap(&g1[0], &g2[0])?.max(gap(&g1[g1.len() - 1], &g2[g2.len() - 1])?);
    if deviation > 1e-12 {
        return Err(Error::EndpointMismatch { deviation });
    }
    let mut out = Vec::with_capacity(g1.len() * grid);
    for (t_index, (a, b)) in g1.iter().zip(g2).enumerate() {
        let sum = a.direct_sum(b)?;
        let n = a.n();
        for j in 0..grid {
            let angle = std::f64::consts::TAU * j as f64 / grid as f64;
            let (ca, sb) = (angle.cos(), angle.sin());
            let rot = linalg::kron(&linalg::real_mat(2, 2, &[ca, sb, -sb, ca]), &linalg::eye(n));
            out.push(SphereSample { t_index, angle, point: sum.unitary_conjugate(&rot.adjoint()) });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_log_coefficients() {
        let e = LogCoefficients::compute(12);
        assert_eq!(e.matrix(0), linalg::zeros(2, 2));
        assert_eq!(e.matrix(1), linalg::real_mat(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        // z² term: M²/(-2) contributes -z²/2 on the diagonal, M contributes z² at (1,1)
        assert_eq!(e.matrix(2), linalg::real_mat(2, 2, &[-0.5, 0.0, 0.0, 0.5]));
        assert!(e.traces_vanish());
    }

    #[test]
    fn log_series_matches_principal_log() {
        let e = LogCoefficients::compute(60);
        let coeffs: Vec<CMat> = (0..=60).map(|m| e.matrix(m)).collect();
        let z = c(0.3, 0.4);
        let mut sum = linalg::zeros(2, 2);
        let mut zp = ONE;
        for m in &coeffs {
            sum += m.map(|x| x * zp);
            zp *= z;
        }
        let f = CMat::from_row_slice(2, 2, &[ONE, z, z, ONE + z * z]);
        assert!((sum - linalg::principal_log(&f).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn radius_two() {
        let r = log_radius_experiment(200).unwrap();
        assert!((r.estimate - 0.5).abs() < 0.02, "{}", r.estimate);
        assert!(r.trace_exactly_zero);
        assert!(r.max_abs_trace < 1e-12);
        assert!(r.to_csv().lines().count() == 201);
        assert!(log_radius_experiment(5).is_err());
    }

    #[test]
    fn bch_low_degrees() {
        let report = bch_check(8, 5, 1).unwrap();
        assert!(report.degree_one_exact && report.degree_two_exact);
        assert!(report.max_error < 1e-4);
    }

    #[test]
    fn martin_shamovich_substitution() {
        let r = martin_shamovich_check(8, 200).unwrap();
        assert!(r.product_matches);
        assert_eq!(r.matched_through, 8);
        assert!(r.divergence.diverges);
    }

    #[test]
    fn triangular_examples() {
        let x = MatrixTuple::scalar(&[ONE]);
        let y = MatrixTuple::scalar(&[ZERO]);
        let p = triangular_point(&x, &y, ONE).unwrap();
        assert_eq!(p.get(0), &linalg::real_mat(2, 2, &[1.0, 1.0, 0.0, 0.0]));
        let sq = parse("x1^2").unwrap();
        let r = triangular_continuation_check(&sq, &x, &y, ONE).unwrap();
        assert_eq!(r.deviation, 0.0);
        let k = parse("3").unwrap();
        assert_eq!(triangular_continuation_check(&k, &x, &y, ONE).unwrap().deviation, 0.0);
        let mut rng = random::rng(4, 0);
        let x = random::tuple_in_ball(&mut rng, 3, 2, 0.5);
        let y = random::tuple_in_ball(&mut rng, 3, 2, 0.5);
        let e = parse("inv(1 - x1/2) x2").unwrap();
        assert!(triangular_continuation_check(&e, &x, &y, c(0.3, -1.0)).unwrap().holds(1e-9));
        assert!(triangular_continuation_check(&parse("x1'").unwrap(), &x, &y, ONE).is_err());
    }

    #[test]
    fn sphere_samples() {
        let mut rng = random::rng(6, 0);
        let start = random::tuple_in_ball(&mut rng, 2, 1, 0.5);
        let end = random::tuple_in_ball(&mut rng, 2, 1, 0.5);
        let mid1 = random::tuple_in_ball(&mut rng, 2, 1, 0.5);
        let mid2 = random::tuple_in_ball(&mut rng, 2, 1, 0.5);
        let g1 = vec![start.clone(), mid1, end.clone()];
        let g2 = vec![start.clone(), mid2, end];
        let samples = so2_sphere_samples(&g1, &g2, 8).unwrap();
        assert_eq!(samples.len(), 24);
        let spectrum = |m: &CMat| {
            let mut e = linalg::eigenvalues(m);
            e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
            e
        };
        let base = spectrum(samples[0].point.get(0));
        for s in samples.iter().filter(|s| s.t_index == 0) {
            let sp = spectrum(s.point.get(0));
            assert!(sp.iter().zip(&base).all(|(a, b)| (a - b).norm() < 1e-10));
        }
        let direct = g1[1].direct_sum(&g2[1]).unwrap();
        assert!(samples[8].point.sub(&direct).unwrap().norm() < 1e-15);
        let bad = vec![start.clone(), g2[1].clone()];
        assert!(matches!(so2_sphere_samples(&g1[..2], &bad, 4), Err(Error::EndpointMismatch { .. })));
    }
}
