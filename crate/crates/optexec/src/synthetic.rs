//! Seeded synthetic inputs: random SPD matrices and correlation matrices for
//! tests, property suites, and benchmark sweeps.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use crate::noise::{chacha, symmetric_unit_f64, unit_open_f64};
use crate::spd::SymPosDef;

/// Deterministic generator for synthetic inputs.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    chacha(seed)
}

/// Random n×n symmetric positive definite matrix with entries on the order
/// of `scale` and condition numbers spread over a couple of decades:
/// A = scale·(GGᵀ/n + diag(0.1 + 0.9u)).
pub fn random_spd(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> SymPosDef {
    let g = DMatrix::from_fn(n, n, |_, _| symmetric_unit_f64(rng));
    let mut a = (&g * g.transpose()) / n as f64;
    for i in 0..n {
        a[(i, i)] += 0.1 + 0.9 * unit_open_f64(rng);
    }
    SymPosDef::new(a * scale, "synthetic SPD").expect("synthetic matrix is SPD by construction")
}

/// Random correlation matrix (unit diagonal, positive definite), built by
/// normalizing a random SPD matrix.
pub fn random_correlation(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = random_spd(n, 1.0, rng).into_matrix();
    let d: Vec<f64> = (0..n).map(|i| a[(i, i)].sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (d[i] * d[j]))
}
