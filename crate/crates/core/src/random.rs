//! Seeded random fixtures: Gaussian matrices, unitaries, isometries and
//! contractions of prescribed norm.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{c, identity, orthonormal_range, polar_unitary, CMat, Tolerance};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    if n == 0 {
        return identity(0);
    }
    polar_unitary(&gaussian_matrix(rng, n, n))
}

/// `rows × k` matrix with orthonormal columns.
pub fn random_isometry<R: Rng + ?Sized>(rng: &mut R, rows: usize, k: usize) -> CMat {
    let g = gaussian_matrix(rng, rows, k);
    orthonormal_range(&g, &Tolerance::default())
}

/// Random `rows × cols` matrix rescaled to spectral norm `norm`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize, norm: f64) -> CMat {
    let g = gaussian_matrix(rng, rows, cols);
    let s = crate::numerics::op_norm(&g);
    if s == 0.0 {
        return g;
    }
    g * c(norm / s, 0.0)
}
