//! Points of the matrix universe: `d`-tuples of `n × n` complex matrices.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTuple {
    n: usize,
    mats: Vec<CMat>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        let n = mats.first().map_or(0, |m| m.nrows());
        for (i, m) in mats.iter().enumerate() {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "tuple entry {} is {}x{}, expected {n}x{n}",
                    i + 1,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(MatrixTuple { n, mats })
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        MatrixTuple { n, mats: vec![linalg::zeros(n, n); d] }
    }

    /// Scalar point `(w_1, ..., w_d)` viewed as a `1 × 1` tuple.
    pub fn scalar(w: &[Complex64]) -> Self {
        MatrixTuple { n: 1, mats: w.iter().map(|&z| CMat::from_element(1, 1, z)).collect() }
    }

    /// The point `λ·I_n` in every coordinate.
    pub fn scalar_point(n: usize, w: &[Complex64]) -> Self {
        MatrixTuple { n, mats: w.iter().map(|&z| linalg::eye(n).map(|e| e * z)).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.mats.len()
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn get(&self, i: usize) -> &CMat {
        &self.mats[i]
    }

    pub fn into_mats(self) -> Vec<CMat> {
        self.mats
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.d() != other.d() {
            return Err(Error::DimensionMismatch(format!(
                "tuples (n={}, d={}) and (n={}, d={})",
                self.n,
                self.d(),
                other.n,
                other.d()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(MatrixTuple { n: self.n, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a + b).collect() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(MatrixTuple { n: self.n, mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a - b).collect() })
    }

    pub fn scale(&self, z: Complex64) -> Self {
        MatrixTuple { n: self.n, mats: self.mats.iter().map(|m| m.map(|e| e * z)).collect() }
    }

    /// `self + z·h`.
    pub fn axpy(&self, z: Complex64, h: &Self) -> Result<Self> {
        self.add(&h.scale(z))
    }

    /// Componentwise direct sum `X ⊕ Y`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch("direct sum of tuples of different length".into()));
        }
        Ok(MatrixTuple {
            n: self.n + other.n,
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| linalg::direct_sum(a, b)).collect(),
        })
    }

    /// `U* X U` componentwise.
    pub fn unitary_conjugate(&self, u: &CMat) -> Self {
        let ua = u.adjoint();
        MatrixTuple { n: self.n, mats: self.mats.iter().map(|m| &ua * m * u).collect() }
    }

    /// `S⁻¹ X S` componentwise.
    pub fn similarity(&self, s: &CMat) -> Result<Self> {
        let si = linalg::inverse(s)?;
        Ok(MatrixTuple { n: self.n, mats: self.mats.iter().map(|m| &si * m * s).collect() })
    }

    /// Concatenation `(X_1..X_d, Y_1..Y_e)`, used for the doubled alphabet of
    /// directional forms.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("concatenating tuples of different size".into()));
        }
        let mut mats = self.mats.clone();
        mats.extend(other.mats.iter().cloned());
        Ok(MatrixTuple { n: self.n, mats })
    }

    /// Largest operator norm over the coordinates.
    pub fn norm(&self) -> f64 {
        self.mats.iter().map(linalg::op_norm).fold(0.0, f64::max)
    }

    /// Row-style norm `‖Σ X_i X_i*‖^{1/2}`.
    pub fn row_norm(&self) -> f64 {
        let mut acc = linalg::zeros(self.n, self.n);
        for m in &self.mats {
            acc += m * m.adjoint();
        }
        linalg::op_norm(&acc).sqrt()
    }

    pub fn to_json(&self) -> TupleJson {
        TupleJson { n: self.n, d: self.d(), matrices: self.mats.iter().map(linalg::json::to_rows).collect() }
    }

    pub fn from_json(j: &TupleJson) -> Result<Self> {
        if j.matrices.len() != j.d {
            return Err(Error::DimensionMismatch(format!(
                "tuple declares d = {} but lists {} matrices",
                j.d,
                j.matrices.len()
            )));
        }
        let mats = j.matrices.iter().map(linalg::json::from_rows).collect::<Result<Vec<_>>>()?;
        if j.d == 0 {
            return Ok(MatrixTuple::zeros(j.n, 0));
        }
        let t = MatrixTuple::new(mats)?;
        if t.n != j.n {
            return Err(Error::DimensionMismatch(format!(
                "tuple declares n = {} but matrices are {}x{}",
                j.n, t.n, t.n
            )));
        }
        Ok(t)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("tuple serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleJson {
    pub n: usize,
    pub d: usize,
    pub matrices: Vec<linalg::json::Rows>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real_mat};

    #[test]
    fn rejects_mixed_sizes() {
        assert!(MatrixTuple::new(vec![linalg::eye(2), linalg::eye(3)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = MatrixTuple::new(vec![real_mat(2, 2, &[0.0, 1.0, 0.0, 0.0]), linalg::eye(2).map(|z| z * c(0.5, -1.0))])
            .unwrap();
        let back = MatrixTuple::from_json_str(&t.to_json_string()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn direct_sum_sizes() {
        let a = MatrixTuple::zeros(2, 3);
        let b = MatrixTuple::zeros(1, 3);
        let s = a.direct_sum(&b).unwrap();
        assert_eq!((s.n(), s.d()), (3, 3));
    }
}
