//! Sobolev and Lebesgue norms, the `H^J ↪ L^∞` embedding constant, and
//! certified lower bounds for `inf |u|`.
//!
//! All `L²`-type quantities use the integral convention on `[0, 2π)^N`:
//! `‖f‖²_{H^r} = (2π)^N Σ_k ⟨k⟩^{2r} |û(k)|²` with `⟨k⟩ = (1+|k|²)^{1/2}`,
//! so that `r = 0` agrees with the quadrature value of `∫|f|²`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};
use crate::spectral::{oversample, SpectralField, TorusGrid};

/// Oversampling used when certifying infima without an explicit factor.
pub const DEFAULT_CERTIFY_OVERSAMPLE: usize = 4;

fn volume(dim: usize) -> f64 {
    (2.0 * PI).powi(dim as i32)
}

/// All multi-indices `β ∈ ℕ^dim` with `|β| <= max_order`, ordered by total order.
pub fn multi_indices(dim: usize, max_order: u32) -> Vec<Vec<u32>> {
    fn fill(prefix: &mut Vec<u32>, dim: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for b in 0..=remaining {
            prefix.push(b);
            fill(prefix, dim, remaining - b, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    fill(&mut Vec::with_capacity(dim), dim, max_order, &mut out);
    out.sort_by_key(|b| b.iter().sum::<u32>());
    out
}

/// `‖f‖_{H^r}` in the spectral (Bessel-potential) form.
pub fn sobolev_norm_spectral(field: &SpectralField, r: f64) -> f64 {
    let k2 = field.grid().k_squared();
    let sum: f64 = field
        .coeffs()
        .iter()
        .zip(&k2)
        .map(|(c, &k2)| (1.0 + k2).powf(r) * c.norm_sqr())
        .sum();
    (volume(field.grid().dim()) * sum).sqrt()
}

/// `‖f‖_{L²}`.
pub fn l2_norm(field: &SpectralField) -> f64 {
    (volume(field.grid().dim()) * field.coeff_energy()).sqrt()
}

/// `Σ_{|β|<=J} ‖∂^β f‖_{L²}` with derivatives taken through `(ik)^β`.
pub fn sobolev_norm_derivative_sum(field: &SpectralField, j: u32) -> f64 {
    let grid = field.grid();
    let ks: Vec<Vec<i64>> = (0..grid.len()).map(|i| grid.wavenumber(i)).collect();
    let vol = volume(grid.dim());
    multi_indices(grid.dim(), j)
        .iter()
        .map(|beta| {
            let sum: f64 = field
                .coeffs()
                .iter()
                .zip(&ks)
                .map(|(c, k)| {
                    let sym: f64 = k
                        .iter()
                        .zip(beta)
                        .map(|(&ka, &ba)| (ka as f64).powi(ba as i32))
                        .product();
                    sym * sym * c.norm_sqr()
                })
                .sum();
            (vol * sum).sqrt()
        })
        .sum()
}

/// Where an embedding constant came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C1Source {
    ComputedBound,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConstants {
    pub c1: f64,
    pub c1_source: C1Source,
}

/// Coefficient-sum bound for `‖f‖_{L^∞} <= C₁ ‖f‖_{H^J}` on band-limited `f`:
/// `C₁ = (2π)^{-N/2} (Σ_k ⟨k⟩^{-2J})^{1/2}`, summed over the grid truncation.
pub fn embedding_constant_c1(j: u32, dim: usize, grid: &TorusGrid) -> Result<f64> {
    if 2 * j as usize <= dim {
        return Err(FnlsError::EmbeddingHypothesis { j, dim });
    }
    if grid.dim() != dim {
        return Err(FnlsError::GridMismatch(format!(
            "grid has dimension {}, expected {dim}",
            grid.dim()
        )));
    }
    let sum: f64 = grid
        .k_squared()
        .into_iter()
        .map(|k2| (1.0 + k2).powf(-(j as f64)))
        .sum();
    Ok(sum.sqrt() / volume(dim).sqrt())
}

/// The constant `c₁ >= 1` with `‖f‖_{L^∞} <= c₁ ‖f‖_{H^{⌊N/2⌋+1}}` used by the
/// power-nonlinearity estimates: the coefficient-sum bound at regularity
/// `⌊N/2⌋+1`, raised to 1 if smaller.
pub fn power_estimate_c1(grid: &TorusGrid) -> EmbeddingConstants {
    let j = (grid.dim() / 2 + 1) as u32;
    let c1 = embedding_constant_c1(j, grid.dim(), grid).expect("⌊N/2⌋+1 > N/2");
    EmbeddingConstants { c1: c1.max(1.0), c1_source: C1Source::ComputedBound }
}

/// Certified lower bound for `inf_{T^N} |u|` of the band-limited field.
///
/// Takes the minimum of `|u|` on a grid refined by `oversample_factor` and
/// subtracts `L·h/2`, where `L = Σ_k |k|·|û(k)|` bounds `|∇u|` and `h` is the
/// diameter of a fine-grid cell, so every point is within `h/2` of a node.
pub fn certified_infimum(field: &SpectralField, oversample_factor: usize) -> Result<f64> {
    if oversample_factor < 2 {
        return Err(FnlsError::InvalidParameter(format!(
            "certification needs oversample factor >= 2, got {oversample_factor}"
        )));
    }
    let fine = oversample(field, oversample_factor)?;
    let g_min = fine.min_modulus();
    let lipschitz: f64 = field
        .coeffs()
        .iter()
        .zip(field.grid().k_squared())
        .map(|(c, k2)| k2.sqrt() * c.norm())
        .sum();
    let h = fine.grid().spacing() * (field.grid().dim() as f64).sqrt();
    Ok((g_min - 0.5 * lipschitz * h).max(0.0))
}

/// `η = 1 / certified_inf`, so that `η · inf |u| >= 1`; `None` when the
/// bound is zero.
pub fn eta_of(field: &SpectralField) -> Option<f64> {
    let bound = certified_infimum(field, DEFAULT_CERTIFY_OVERSAMPLE).ok()?;
    (bound > 0.0).then(|| 1.0 / bound)
}

/// `‖f‖_{L^∞}` sampled on a refined grid.
pub fn sup_norm_sampled(field: &SpectralField, oversample_factor: usize) -> Result<f64> {
    Ok(oversample(field, oversample_factor)?.max_modulus())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub h_spectral: f64,
    pub h_derivative_sum: f64,
    pub l_inf: f64,
    pub inf_lower_bound: f64,
}

impl NormReport {
    pub fn compute(field: &SpectralField, j: u32, oversample_factor: usize) -> Result<Self> {
        let factor = oversample_factor.max(2);
        Ok(NormReport {
            l2: l2_norm(field),
            h_spectral: sobolev_norm_spectral(field, j as f64),
            h_derivative_sum: sobolev_norm_derivative_sum(field, j),
            l_inf: sup_norm_sampled(field, factor)?,
            inf_lower_bound: certified_infimum(field, factor)?,
        })
    }

    pub const CSV_HEADER: &'static str = "t,l2,h_spectral,h_derivative_sum,l_inf,inf_lower_bound";

    pub fn csv_row(&self, t: f64) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            t, self.l2, self.h_spectral, self.h_derivative_sum, self.l_inf, self.inf_lower_bound
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{evaluate_at, inverse_transform};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn smooth_random(grid: TorusGrid, rng: &mut ChaCha8Rng) -> SpectralField {
        let k2 = grid.k_squared();
        let coeffs = k2
            .iter()
            .map(|&k2| {
                let decay = (-0.3 * k2).exp();
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay
            })
            .collect();
        SpectralField::from_coeffs(grid, coeffs).unwrap()
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(1, 3).len(), 4);
        // C(J+N, N)
        assert_eq!(multi_indices(2, 2).len(), 6);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(2, 2)[0], vec![0, 0]);
    }

    #[test]
    fn spectral_norm_examples() {
        let g = TorusGrid::new(1, 16).unwrap();
        let cst = SpectralField::constant(g, c(3.0, 4.0));
        for r in [0.0, 1.0, 2.5] {
            let n = sobolev_norm_spectral(&cst, r);
            assert!((n - (2.0 * PI).sqrt() * 5.0).abs() < 1e-13);
        }
        let w = SpectralField::plane_wave(g, c(1.0, 0.0), &[1]).unwrap();
        let n = sobolev_norm_spectral(&w, 1.0);
        assert!((n - (2.0 * PI).sqrt() * 2f64.sqrt()).abs() < 1e-13);

        let g2 = TorusGrid::new(2, 8).unwrap();
        let cst2 = SpectralField::constant(g2, c(2.0, 0.0));
        assert!((sobolev_norm_spectral(&cst2, 1.0) - 2.0 * PI * 2.0).abs() < 1e-12);
    }

    #[test]
    fn l2_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (dim, m) in [(1, 32), (2, 8)] {
            let g = TorusGrid::new(dim, m).unwrap();
            let f = smooth_random(g, &mut rng);
            let p = inverse_transform(&f);
            let quad = g.spacing().powi(dim as i32)
                * p.samples().iter().map(|z| z.norm_sqr()).sum::<f64>();
            let n = sobolev_norm_spectral(&f, 0.0);
            assert!((n * n - quad).abs() <= 1e-12 * quad);
        }
    }

    #[test]
    fn derivative_sum_examples() {
        let g = TorusGrid::new(1, 16).unwrap();
        let cst = SpectralField::constant(g, c(0.0, 2.0));
        assert!((sobolev_norm_derivative_sum(&cst, 2) - (2.0 * PI).sqrt() * 2.0).abs() < 1e-13);
        let w = SpectralField::plane_wave(g, c(1.0, 0.0), &[1]).unwrap();
        assert!((sobolev_norm_derivative_sum(&w, 1) - 2.0 * (2.0 * PI).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn sandwich_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = TorusGrid::new(1, 32).unwrap();
        for _ in 0..200 {
            let f = smooth_random(g, &mut rng);
            let spec = sobolev_norm_spectral(&f, 1.0);
            let dsum = sobolev_norm_derivative_sum(&f, 1);
            assert!(spec <= dsum * (1.0 + 1e-12));
            assert!(dsum <= 2f64.sqrt() * spec * (1.0 + 1e-12));
            let mut prev = 0.0;
            for r in [0.0, 0.5, 1.0, 1.5, 3.0] {
                let n = sobolev_norm_spectral(&f, r);
                assert!(n >= prev);
                prev = n;
            }
        }
    }

    #[test]
    fn c1_four_term_sum() {
        let g = TorusGrid::new(1, 4).unwrap();
        let expect = (2.0 * PI).powf(-0.5) * (1.0 / 5.0 + 1.0 / 2.0 + 1.0 + 1.0 / 2.0f64).sqrt();
        assert!((embedding_constant_c1(1, 1, &g).unwrap() - expect).abs() < 1e-15);
        assert!(matches!(
            embedding_constant_c1(1, 2, &TorusGrid::new(2, 4).unwrap()),
            Err(FnlsError::EmbeddingHypothesis { .. })
        ));
        assert!(embedding_constant_c1(2, 3, &TorusGrid::new(3, 4).unwrap()).is_ok());
        assert!(embedding_constant_c1(1, 1, &g).unwrap() >= (2.0 * PI).powf(-0.5));
        assert!(power_estimate_c1(&g).c1 >= 1.0);
    }

    #[test]
    fn embedding_inequality_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (dim, m, j) in [(1usize, 16usize, 1u32), (1, 32, 2), (2, 8, 2)] {
            let g = TorusGrid::new(dim, m).unwrap();
            let c1 = embedding_constant_c1(j, dim, &g).unwrap();
            for _ in 0..100 {
                let coeffs = (0..g.len())
                    .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                    .collect();
                let f = SpectralField::from_coeffs(g, coeffs).unwrap();
                let sup = sup_norm_sampled(&f, 4).unwrap();
                assert!(sup <= c1 * sobolev_norm_spectral(&f, j as f64) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn certified_infimum_examples() {
        let g = TorusGrid::new(1, 16).unwrap();
        let cst = SpectralField::constant(g, c(-1.5, 2.0));
        assert_eq!(certified_infimum(&cst, 2).unwrap(), 2.5);
        assert!(certified_infimum(&cst, 1).is_err());

        let mut f = SpectralField::constant(g, c(2.0, 0.0));
        f.set_coeff(&[1], c(1.0, 0.0)).unwrap();
        let mut prev = 0.0;
        for factor in [2, 4, 8, 16, 64] {
            let b = certified_infimum(&f, factor).unwrap();
            assert!(b <= 1.0);
            assert!(b >= prev);
            prev = b;
        }
        assert!(1.0 - prev < 1e-2);

        let w = SpectralField::plane_wave(g, c(1.0, 0.0), &[1]).unwrap();
        let b = certified_infimum(&w, 64).unwrap();
        assert!(b <= 1.0 && 1.0 - b < 1e-2);
    }

    #[test]
    fn eta_examples() {
        let g = TorusGrid::new(1, 16).unwrap();
        assert_eq!(eta_of(&SpectralField::constant(g, c(2.0, 0.0))), Some(0.5));
        assert_eq!(eta_of(&SpectralField::zeros(g)), None);
        let tiny = eta_of(&SpectralField::constant(g, c(1e-9, 0.0))).unwrap();
        assert!(tiny > 1e8);
    }

    #[test]
    fn certified_infimum_is_sound_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (dim, m) in [(1usize, 16usize), (2, 8)] {
            let g = TorusGrid::new(dim, m).unwrap();
            for _ in 0..5 {
                let mut f = smooth_random(g, &mut rng);
                f.coeffs_mut()[0] += c(2.5, 0.0);
                let bound = certified_infimum(&f, 2).unwrap();
                for _ in 0..2000 {
                    let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
                    assert!(evaluate_at(&f, &x).norm() >= bound);
                }
            }
        }
    }
}
