//! Dense small-matrix kernel.

pub mod cmatrix;
pub mod exterior;
pub mod matrix;
pub mod product;
pub mod svd;
pub mod svf;

pub use cmatrix::CMatrix;
pub use exterior::{binomial, colex_subsets, exterior_power};
pub use matrix::Matrix;
pub use product::{householder_qr, ScaledProduct};
pub use svd::{log_svd, norm2, singular_values, sv, svd_full, LogSvd, Svd, TOL_INV, TOL_SVD};
pub use svf::{eval_svf, eval_svf_log, gap_report, oplus, GapReport, Signature, SvFormula, TOL_GAP};

/// Realification of a complex matrix.
pub fn realify(g: &CMatrix) -> Matrix {
    g.realify()
}
