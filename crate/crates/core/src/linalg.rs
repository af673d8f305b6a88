//! Small dense-matrix helpers shared by the analysis code and the tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Largest entry magnitude.
pub fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone().singular_values().max()
}

pub fn vector_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}
