//! Seeded random matrices for property checks and verification batches.

use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::C64;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Random 2×2 Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<C64> {
    let g = Matrix2::from_fn(|_, _| gaussian(rng));
    (g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Full-rank random density matrix `G G† / tr(G G†)` with `G` Ginibre.
pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let dim = 1 << n;
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    let mut rho = rho / tr;
    // exact Hermitian symmetry; the product leaves ~1e-16 asymmetry
    for r in 0..dim {
        rho[(r, r)].im = 0.0;
        for c in r + 1..dim {
            rho[(c, r)] = rho[(r, c)].conj();
        }
    }
    rho
}

/// Random weights drawn uniformly from `[lo, hi)`.
pub fn random_weights<R: Rng + ?Sized>(count: usize, lo: f64, hi: f64, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| rng.random_range(lo..hi)).collect()
}
