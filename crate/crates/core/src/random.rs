//! Seeded random generators for tuples, matrices and test series.
//!
//! Every sample is drawn from its own ChaCha stream (`root seed`, `stream`),
//! so results do not depend on iteration order or thread count.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, c, CMat};
use crate::series::NCSeries;
use crate::tuple::MatrixTuple;
use crate::word::{Letter, Word};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64, stream: u64) -> SampleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Standard complex Gaussian, `E|z|² = 1`.
pub fn gaussian(r: &mut SampleRng) -> Complex64 {
    let a: f64 = r.sample(StandardNormal);
    let b: f64 = r.sample(StandardNormal);
    c(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_mat(r: &mut SampleRng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian(r))
}

/// Ginibre matrix with entries of variance `1/n`.
pub fn ginibre(r: &mut SampleRng, n: usize) -> CMat {
    gaussian_mat(r, n, n).scale(1.0 / (n as f64).sqrt())
}

/// Matrix with operator norm drawn uniformly from `(0, radius]`.
pub fn in_ball(r: &mut SampleRng, n: usize, radius: f64) -> CMat {
    let g = ginibre(r, n);
    let norm = linalg::op_norm(&g);
    let s: f64 = r.random_range(0.05..=1.0);
    if norm == 0.0 {
        g
    } else {
        g.scale(radius * s / norm)
    }
}

/// A `d`-tuple with every coordinate of operator norm at most `radius`.
pub fn tuple_in_ball(r: &mut SampleRng, n: usize, d: usize, radius: f64) -> MatrixTuple {
    MatrixTuple::new((0..d).map(|_| in_ball(r, n, radius)).collect()).expect("square")
}

/// Ginibre tuple without rescaling.
pub fn ginibre_tuple(r: &mut SampleRng, n: usize, d: usize) -> MatrixTuple {
    MatrixTuple::new((0..d).map(|_| ginibre(r, n)).collect()).expect("square")
}

/// Strict contraction with norm at most `bound < 1`.
pub fn contraction(r: &mut SampleRng, n: usize, bound: f64) -> CMat {
    in_ball(r, n, bound)
}

/// Haar-like unitary from the QR factorization of a Gaussian matrix.
pub fn unitary(r: &mut SampleRng, n: usize) -> CMat {
    let qr = gaussian_mat(r, n, n).qr();
    let (mut q, rr) = qr.unpack();
    for j in 0..n {
        let d = rr[(j, j)];
        if d.norm() > 0.0 {
            let phase = d / d.norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random `A` with `1 − A − A*` positive definite (margin drawn in `[0.05, 0.95]`).
pub fn denominator_a(r: &mut SampleRng, n: usize) -> CMat {
    let g = gaussian_mat(r, n, n);
    let lam = linalg::hermitian_eigen(&g).values.last().copied().unwrap_or(0.0);
    let margin: f64 = r.random_range(0.05..0.95);
    let scale: f64 = if lam > 0.0 { (1.0 - margin) / (2.0 * lam) } else { r.random_range(0.1..1.0) };
    g.scale(scale)
}

/// Invertible matrix with condition number bounded by a few units.
pub fn well_conditioned(r: &mut SampleRng, n: usize) -> CMat {
    linalg::eye(n) + in_ball(r, n, 0.5)
}

fn random_word(r: &mut SampleRng, nvars: usize, len: usize, stars: Option<bool>) -> Word {
    Word::new(
        (0..len)
            .map(|_| {
                let var = r.random_range(0..nvars) as u16;
                let starred = stars.unwrap_or_else(|| r.random_bool(0.5));
                Letter::new(var, starred)
            })
            .collect(),
    )
}

/// Polynomial with `nterms` random words (any star pattern) of length
/// `0..=deg` and complex Gaussian coefficients.
pub fn polynomial(r: &mut SampleRng, nvars: usize, k: usize, deg: usize, nterms: usize, maxdeg: usize) -> NCSeries {
    let mut s = NCSeries::zero(nvars, k, maxdeg);
    for _ in 0..nterms {
        let len = r.random_range(0..=deg);
        let w = random_word(r, nvars, len, None);
        s.add_term(w, gaussian_mat(r, k, k));
    }
    s
}

/// Analytic polynomial with rectangular `rows × k` coefficients on words of
/// length `min_len..=deg`.
pub fn analytic_polynomial(
    r: &mut SampleRng,
    nvars: usize,
    rows: usize,
    k: usize,
    min_len: usize,
    deg: usize,
    nterms: usize,
    maxdeg: usize,
) -> NCSeries {
    let mut s = NCSeries::zero_rect(nvars, rows, k, maxdeg);
    for _ in 0..nterms {
        let len = r.random_range(min_len..=deg);
        let w = random_word(r, nvars, len, Some(false));
        s.add_term(w, gaussian_mat(r, rows, k));
    }
    s
}

/// `Σ h_i h_i* + Σ g_i* g_i` with random analytic `h_i`, `g_i` of degree at
/// most `deg`, plus a random self-adjoint pluriharmonic part.
pub fn hereditary_sum(r: &mut SampleRng, nvars: usize, k: usize, deg: usize, count: usize, maxdeg: usize) -> NCSeries {
    let mut s = NCSeries::zero(nvars, k, maxdeg);
    for _ in 0..count {
        let rows = r.random_range(1..=2);
        let nterms = r.random_range(1..=3);
        let h = analytic_polynomial(r, nvars, k, rows, 0, deg, nterms, maxdeg);
        let g = analytic_polynomial(r, nvars, rows, k, 0, deg, nterms, maxdeg);
        s = s.add(&h.mul(&h.adjoint()).expect("shapes")).expect("shapes");
        s = s.add(&g.adjoint().mul(&g).expect("shapes")).expect("shapes");
    }
    let p = analytic_polynomial(r, nvars, k, k, 1, deg, 2, maxdeg);
    let pluri = p.add(&p.adjoint()).expect("shapes");
    s.add(&pluri).expect("shapes")
}

/// A random scalar of modulus at most `radius`.
pub fn scalar_in_disc(r: &mut SampleRng, radius: f64) -> Complex64 {
    let t: f64 = r.random_range(0.0..std::f64::consts::TAU);
    let rho: f64 = r.random_range(0.0..=1.0f64).sqrt() * radius;
    Complex64::from_polar(rho, t)
}

pub fn unit_vector(r: &mut SampleRng, n: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n).map(|_| gaussian(r)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
