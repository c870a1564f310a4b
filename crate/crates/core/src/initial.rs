//! Initial-data generators: constants, plane waves and perturbed constants
//! `c₀ + Σ ε_k e^{ik·x}`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{FnlsError, Result};
use crate::norms::{certified_infimum, DEFAULT_CERTIFY_OVERSAMPLE};
use crate::spectral::{SpectralField, TorusGrid};

/// Every wavevector with `0 < |k|_∞ <= modes`, in lexicographic order.
pub fn low_modes(dim: usize, modes: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut k = vec![-modes; dim];
    loop {
        if k.iter().any(|&x| x != 0) {
            out.push(k.clone());
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if k[i] < modes {
                k[i] += 1;
                break;
            }
            k[i] = -modes;
        }
    }
}

/// `c₀ + Σ_{0<|k|_∞<=modes} ε_k e^{ik·x}` with `ε_k = eps·ξ_k`, `ξ_k` uniform
/// in the unit disc.
pub fn perturbed_constant<R: Rng>(
    grid: TorusGrid,
    c0: Complex64,
    eps: f64,
    modes: i64,
    rng: &mut R,
) -> SpectralField {
    let mut f = SpectralField::constant(grid, c0);
    for k in low_modes(grid.dim(), modes) {
        let r = rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        // modes beyond the Nyquist band are skipped silently
        let _ = f.set_coeff(&k, Complex64::from_polar(eps * r, theta));
    }
    f
}

/// As [`perturbed_constant`], halving the perturbation until the certified
/// infimum is at least `|c₀|(1 - rho)`.
pub fn perturbed_constant_with_floor<R: Rng>(
    grid: TorusGrid,
    c0: Complex64,
    eps: f64,
    modes: i64,
    rho: f64,
    rng: &mut R,
) -> Result<SpectralField> {
    if !(0.0..1.0).contains(&rho) || c0 == Complex64::new(0.0, 0.0) {
        return Err(FnlsError::InvalidParameter(format!(
            "need 0 <= rho < 1 and c0 != 0, got rho = {rho}, c0 = {c0}"
        )));
    }
    let base = perturbed_constant(grid, c0, 1.0, modes, rng);
    let target = c0.norm() * (1.0 - rho);
    let mut scale = eps;
    for _ in 0..64 {
        let f = base.map_multiplier(|i| if i == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(scale, 0.0) });
        if certified_infimum(&f, DEFAULT_CERTIFY_OVERSAMPLE)? >= target {
            return Ok(f);
        }
        scale *= 0.5;
    }
    Ok(SpectralField::constant(grid, c0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn low_mode_count() {
        assert_eq!(low_modes(1, 3).len(), 6);
        assert_eq!(low_modes(2, 1).len(), 8);
    }

    #[test]
    fn floor_is_respected_and_deterministic() {
        let grid = TorusGrid::new(1, 32).unwrap();
        let mk = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            perturbed_constant_with_floor(grid, Complex64::new(2.0, 0.0), 1.0, 3, 0.2, &mut rng)
                .unwrap()
        };
        let f = mk();
        assert!(certified_infimum(&f, 4).unwrap() >= 1.6);
        assert_eq!(f, mk());
        assert_eq!(f.coeff(&[0]), Some(Complex64::new(2.0, 0.0)));
    }
}
