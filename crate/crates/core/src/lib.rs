//! Free noncommutative function calculus.
//!
//! Truncated noncommutative power series with matrix coefficients, their
//! derivatives, middle-matrix plurisubharmonicity certificates, GNS-style
//! realizations and the transforms used to continue them, plus a few numerical
//! experiments around matrix logarithms.

pub mod calculus;
pub mod error;
pub mod eval;
pub mod expr;
pub mod lab;
pub mod linalg;
pub mod middle;
pub mod random;
pub mod realization;
pub mod series;
pub mod transform;
pub mod tuple;
pub mod word;

pub use error::{Error, Result};
pub use expr::{expand, parse, Expr};
pub use linalg::CMat;
pub use num_complex::Complex64;
pub use series::NCSeries;
pub use tuple::MatrixTuple;
pub use word::{Letter, Word};
