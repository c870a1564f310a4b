//! Fixtures shared by the benchmarks.

use fnls_core::initial::perturbed_constant;
use fnls_core::{Complex64, SpectralField, TorusGrid};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Perturbed constant `2 + Σ ε_k e^{ik·x}` with `|ε_k| <= 0.1`, fixed seed.
pub fn smooth_field(dim: usize, points: usize) -> SpectralField {
    let grid = TorusGrid::new(dim, points).expect("valid grid");
    let mut rng = ChaCha8Rng::seed_from_u64(0xbe7c);
    perturbed_constant(grid, Complex64::new(2.0, 0.0), 0.1, 3, &mut rng)
}
