//! Fixtures shared by the criterion benchmarks.

use poa_core::experiments::sample_concave_welfare;
use poa_core::{set_covering_welfare, BasisPair, Result, UncertaintyLevel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Set covering basis for `n` players with the large-population optimal design.
pub fn set_covering_basis(n: usize, delta: UncertaintyLevel) -> Result<BasisPair> {
    let design = poa_core::optimal_design_limit(delta, n);
    BasisPair::new(set_covering_welfare(n), design.u)
}

/// Fixed random concave welfare curve for `n` players.
pub fn concave_welfare(n: usize, seed: u64) -> Vec<f64> {
    sample_concave_welfare(&mut ChaCha8Rng::seed_from_u64(seed), n)
}
