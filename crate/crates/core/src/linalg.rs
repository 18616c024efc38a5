//! Dense complex linear algebra kernel.
//!
//! Everything here works on `DMatrix<Complex64>`. Hermitian spectra, Schur
//! forms, SVD and the Padé exponential come from nalgebra; the principal
//! logarithm is computed here by inverse scaling and squaring on the Schur form.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Builds a matrix from real row-major data.
pub fn real_mat(rows: usize, cols: usize, data: &[f64]) -> CMat {
    CMat::from_row_iterator(rows, cols, data.iter().map(|&x| re(x)))
}

/// Kronecker product `a ⊗ b`; `a` is the outer (word) factor.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    out
}

/// Largest singular value.
pub fn op_norm(a: &CMat) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

pub fn fro_norm(a: &CMat) -> f64 {
    a.norm()
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()).scale(0.5)
}

/// `‖A − A*‖_F / 2`.
pub fn asymmetry(a: &CMat) -> f64 {
    (a - a.adjoint()).norm() * 0.5
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are unit eigenvectors, matching `values`.
    pub vectors: CMat,
}

pub fn hermitian_eigen(a: &CMat) -> HermitianEigen {
    let n = a.nrows();
    if n == 0 {
        return HermitianEigen { values: vec![], vectors: zeros(0, 0) };
    }
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        normalize_phase(col.as_mut_slice());
        vectors.set_column(dst, &col);
    }
    HermitianEigen { values, vectors }
}

/// Rotates a vector so its largest-magnitude component is real and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let Some(pivot) = v.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) else {
        return;
    };
    if pivot.norm() == 0.0 {
        return;
    }
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsdVerdict {
    Psd,
    NotPsd,
}

#[derive(Clone, Debug)]
pub struct PsdReport {
    pub verdict: PsdVerdict,
    pub min_eigenvalue: f64,
    /// Unit eigenvector for `min_eigenvalue`; present iff the verdict is `NotPsd`.
    pub witness: Option<Vec<Complex64>>,
}

impl PsdReport {
    pub fn is_psd(&self) -> bool {
        self.verdict == PsdVerdict::Psd
    }
}

/// PSD test relative to the spectral scale: PSD iff `λ_min ≥ −tol·‖M‖`.
///
/// The input is symmetrized after checking that its anti-Hermitian part is
/// within `tol·‖M‖`.
pub fn psd_check(m: &CMat, tol: f64) -> Result<PsdReport> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "psd_check needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(PsdReport { verdict: PsdVerdict::Psd, min_eigenvalue: 0.0, witness: None });
    }
    let scale = m.norm();
    let asym = asymmetry(m);
    if asym > tol * scale {
        return Err(Error::NotHermitian { asymmetry: asym, allowed: tol * scale });
    }
    let eig = hermitian_eigen(m);
    let min = eig.values[0];
    let spectral = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if min >= -tol * spectral {
        Ok(PsdReport { verdict: PsdVerdict::Psd, min_eigenvalue: min, witness: None })
    } else {
        Ok(PsdReport {
            verdict: PsdVerdict::NotPsd,
            min_eigenvalue: min,
            witness: Some(eig.vectors.column(0).iter().copied().collect()),
        })
    }
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eig(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    hermitian_eigen(m).values[0]
}

/// Positive square root of a Hermitian positive semidefinite matrix.
/// Eigenvalues within `1e-12·‖M‖` below zero are clamped.
pub fn hermitian_sqrt(m: &CMat) -> Result<CMat> {
    let eig = hermitian_eigen(m);
    let scale = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if let Some(&lo) = eig.values.first() {
        if lo < -1e-12 * scale.max(1.0) {
            return Err(Error::PreconditionViolated(format!(
                "hermitian_sqrt of an indefinite matrix (min eigenvalue {lo:.3e})"
            )));
        }
    }
    let d = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        eig.values.len(),
        eig.values.iter().map(|&x| re(x.max(0.0).sqrt())),
    ));
    Ok(&eig.vectors * d * eig.vectors.adjoint())
}

/// Reciprocal condition estimate in the 1-norm (exact inverse, desk scale).
fn rcond(a: &CMat, inv: &CMat) -> f64 {
    let n1 = |m: &CMat| (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let (na, ni) = (n1(a), n1(inv));
    if na == 0.0 || ni == 0.0 {
        return 0.0;
    }
    1.0 / (na * ni)
}

pub fn inverse(a: &CMat) -> Result<CMat> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("inverse of a non-square matrix".into()));
    }
    if a.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    let inv = a.clone().lu().try_inverse().ok_or(Error::SingularInverse { rcond: 0.0 })?;
    let rc = rcond(a, &inv);
    if !rc.is_finite() || rc < 1e-14 {
        return Err(Error::SingularInverse { rcond: rc });
    }
    Ok(inv)
}

/// Solves `A X = B`.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    Ok(inverse(a)? * b)
}

pub fn matrix_exp(a: &CMat) -> CMat {
    if a.nrows() == 0 {
        return zeros(0, 0);
    }
    a.exp()
}

/// Eigenvalues of a general square matrix (diagonal of the complex Schur form).
pub fn eigenvalues(a: &CMat) -> Vec<Complex64> {
    if a.nrows() == 0 {
        return vec![];
    }
    let (_, t) = nalgebra::linalg::Schur::new(a.clone()).unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Principal square root of an upper triangular matrix whose diagonal avoids
/// the closed negative real axis.
fn sqrt_upper_triangular(t: &CMat) -> CMat {
    let n = t.nrows();
    let mut u = zeros(n, n);
    for i in 0..n {
        u[(i, i)] = t[(i, i)].sqrt();
    }
    for j in 1..n {
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= u[(i, k)] * u[(k, j)];
            }
            u[(i, j)] = s / (u[(i, i)] + u[(j, j)]);
        }
    }
    u
}

/// Principal matrix logarithm.
///
/// Fails with [`Error::LogBranchViolation`] when an eigenvalue lies on
/// `(−∞, 0]`, judged with a tolerance of `1e-7·max(1, ‖M‖)` on the imaginary
/// part so that numerically split defective eigenvalues are still caught.
pub fn principal_log(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("log of a non-square matrix".into()));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let (q, mut t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    let scale = op_norm(m).max(1.0);
    for i in 0..n {
        let lam = t[(i, i)];
        if lam.norm() <= 1e-14 * scale || (lam.re <= 0.0 && lam.im.abs() <= 1e-7 * scale) {
            return Err(Error::LogBranchViolation { re: lam.re, im: lam.im });
        }
    }
    let id = eye(n);
    let mut squarings = 0u32;
    while fro_norm(&(&t - &id)) > 0.25 {
        t = sqrt_upper_triangular(&t);
        squarings += 1;
        if squarings > 64 {
            return Err(Error::Evaluation("inverse scaling did not converge".into()));
        }
    }
    // log T = 2 atanh(Y), Y = (T − I)(T + I)⁻¹, ‖Y‖ ≲ 0.15.
    let y = (&t - &id) * inverse(&(&t + &id))?;
    let y2 = &y * &y;
    let mut term = y.clone();
    let mut acc = y.clone();
    for k in 1..60 {
        term = &term * &y2;
        let contrib = term.scale(1.0 / (2 * k + 1) as f64);
        let small = fro_norm(&contrib) < 1e-18 * fro_norm(&acc).max(1e-300);
        acc += contrib;
        if small {
            break;
        }
    }
    let log_t = acc.scale(2.0 * 2f64.powi(squarings as i32));
    Ok(&q * log_t * q.adjoint())
}

/// JSON helpers for complex matrices stored as `[[[re, im], ...], ...]`.
pub mod json {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub type Rows = Vec<Vec<[f64; 2]>>;

    pub fn to_rows(m: &CMat) -> Rows {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
    }

    pub fn from_rows(rows: &Rows) -> Result<CMat> {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix rows".into()));
        }
        Ok(CMat::from_fn(r, cols, |i, j| c(rows[i][j][0], rows[i][j][1])))
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = Rows::deserialize(d)?;
        from_rows(&rows).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
            ms.iter().map(to_rows).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
            let all = Vec::<Rows>::deserialize(d)?;
            all.iter().map(|r| from_rows(r).map_err(serde::de::Error::custom)).collect()
        }
    }

    pub fn vector(v: &[Complex64]) -> Vec<[f64; 2]> {
        v.iter().map(|z| [z.re, z.im]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, seed: f64) -> CMat {
        CMat::from_fn(n, n, |i, j| c(((i * 7 + j * 3) as f64 * seed).sin(), ((i + 2 * j) as f64 * seed).cos()))
    }

    #[test]
    fn psd_identity() {
        let r = psd_check(&eye(3), 1e-9).unwrap();
        assert!(r.is_psd());
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-14);
        assert!(r.witness.is_none());
    }

    #[test]
    fn psd_indefinite_diag() {
        let m = real_mat(2, 2, &[-0.25, 0.0, 0.0, 0.25]);
        let r = psd_check(&m, 1e-9).unwrap();
        assert_eq!(r.verdict, PsdVerdict::NotPsd);
        assert!((r.min_eigenvalue + 0.25).abs() < 1e-14);
        let w = r.witness.unwrap();
        assert!((w[0] - ONE).norm() < 1e-12 && w[1].norm() < 1e-12);
    }

    #[test]
    fn gram_is_psd() {
        let a = sample(5, 0.37);
        assert!(psd_check(&(a.adjoint() * &a), 1e-9).unwrap().is_psd());
    }

    #[test]
    fn psd_rejects_non_hermitian() {
        let m = real_mat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(psd_check(&m, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert!(principal_log(&eye(3)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn log_exp_round_trip() {
        let a = sample(4, 0.21).scale(0.2);
        let l = principal_log(&matrix_exp(&a)).unwrap();
        assert!((l - &a).norm() < 1e-10);
    }

    #[test]
    fn log_commutes_and_exponentiates_back() {
        // f(1.8i) = [[1, 1.8i], [1.8i, −2.24]]
        let m = CMat::from_row_slice(2, 2, &[ONE, c(0.0, 1.8), c(0.0, 1.8), re(-2.24)]);
        let l = principal_log(&m).unwrap();
        assert!((matrix_exp(&l) - &m).norm() < 1e-10 * m.norm());
        assert!((&l * &m - &m * &l).norm() < 1e-10);
    }

    #[test]
    fn log_rejects_defective_negative_eigenvalue() {
        // f(2i) = [[1, 2i], [2i, −3]] has the repeated eigenvalue −1.
        let m = CMat::from_row_slice(2, 2, &[ONE, c(0.0, 2.0), c(0.0, 2.0), re(-3.0)]);
        assert!(matches!(principal_log(&m), Err(Error::LogBranchViolation { .. })));
    }

    #[test]
    fn hermitian_sqrt_squares_back() {
        let a = sample(4, 0.5);
        let p = a.adjoint() * &a + eye(4);
        let s = hermitian_sqrt(&p).unwrap();
        assert!((&s * &s - &p).norm() < 1e-10);
    }

    #[test]
    fn singular_inverse_is_reported() {
        let m = real_mat(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(inverse(&m), Err(Error::SingularInverse { .. })));
    }

    #[test]
    fn direct_sum_and_kron_shapes() {
        let a = eye(2);
        let b = sample(3, 0.1);
        assert_eq!(direct_sum(&a, &b).shape(), (5, 5));
        assert_eq!(kron(&a, &b).shape(), (6, 6));
        assert!((op_norm(&eye(3)) - 1.0).abs() < 1e-14);
    }
}
