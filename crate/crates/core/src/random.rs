//! Seeded samplers for matrices, rotations and flags.

use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::flags::Flag;
use crate::linalg::{householder_qr, CMatrix, Matrix, Signature};

pub type LabRng = ChaCha8Rng;

pub fn rng(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_vec(rows, cols, data)
}

pub fn gaussian_cmatrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    let data: Vec<Complex64> = (0..rows * cols).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    CMatrix::from_vec(rows, cols, data)
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, m: usize) -> Matrix {
    let (q, _) = householder_qr(&gaussian_matrix(rng, m, m));
    q
}

/// Uniformly distributed τ-flag.
pub fn random_flag<R: Rng>(rng: &mut R, tau: &Signature) -> Flag {
    let q = random_orthogonal(rng, tau.ambient());
    Flag::from_orthonormal(tau.clone(), q.leading_cols(tau.top()))
}

/// Rotation by `angle` in the plane of two random orthonormal vectors.
pub fn random_plane_rotation<R: Rng>(rng: &mut R, m: usize, angle: f64) -> Matrix {
    let q = random_orthogonal(rng, m);
    let (c, s) = (angle.cos(), angle.sin());
    let mut g = Matrix::identity(m);
    g[(0, 0)] = c;
    g[(0, 1)] = -s;
    g[(1, 0)] = s;
    g[(1, 1)] = c;
    &(&q * &g) * &q.transpose()
}
