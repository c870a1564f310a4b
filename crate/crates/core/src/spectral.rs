//! Discrete Fourier representation of fields on the torus `T^N = [0, 2π)^N`.
//!
//! A [`SpectralField`] holds the truncated coefficients `û(k)` for
//! `k ∈ {-M/2, …, M/2-1}^N`, stored in FFT order (non-negative wavenumbers
//! first, then the negative ones) and row-major across axes. Coefficients
//! follow the `(2π)^{-N} ∫ u e^{-ik·x} dx` convention, so the forward
//! transform carries the `1/M^N` factor and the inverse transform is a plain
//! trigonometric sum.
//!
//! The Nyquist index `M/2` is identified with the wavenumber `-M/2`; every
//! multiplier uses that representative.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// Uniform tensor grid on `T^N` with `M` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    points: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, points: usize) -> Result<Self> {
        if dim == 0 {
            return Err(FnlsError::InvalidGrid("dimension must be positive".into()));
        }
        if points < 4 || !points.is_multiple_of(2) {
            return Err(FnlsError::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {points}"
            )));
        }
        let total = (points as u128).checked_pow(dim as u32);
        if total.is_none_or(|t| t > (1u128 << 40)) {
            return Err(FnlsError::InvalidGrid(format!(
                "{points}^{dim} grid nodes is too large"
            )));
        }
        Ok(TorusGrid { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid spacing `2π/M` along each axis.
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    /// Total number of nodes `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid with `factor·M` points per axis.
    pub fn refined(&self, factor: usize) -> Result<TorusGrid> {
        if factor == 0 {
            return Err(FnlsError::InvalidParameter("oversample factor must be >= 1".into()));
        }
        TorusGrid::new(self.dim, self.points * factor)
    }

    /// Physical coordinates of the node with flat (row-major) index `flat`.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(flat)
            .into_iter()
            .map(|j| j as f64 * h)
            .collect()
    }

    /// Per-axis indices of a flat row-major index; axis 0 varies slowest.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// Integer wavenumber vector of the coefficient at flat FFT-order index.
    pub fn wavenumber(&self, flat: usize) -> Vec<i64> {
        self.multi_index(flat)
            .into_iter()
            .map(|i| axis_wavenumber(i, self.points))
            .collect()
    }

    /// Flat FFT-order index of wavenumber `k`, if it lies in the truncation.
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dim {
            return None;
        }
        let half = (self.points / 2) as i64;
        let mut flat = 0usize;
        for &ka in k {
            if ka < -half || ka >= half {
                return None;
            }
            flat = flat * self.points + axis_index(ka, self.points);
        }
        Some(flat)
    }

    /// `|k|²` for every coefficient, in FFT order.
    pub fn k_squared(&self) -> Vec<f64> {
        (0..self.len())
            .map(|f| {
                self.wavenumber(f)
                    .iter()
                    .map(|&k| (k * k) as f64)
                    .sum::<f64>()
            })
            .collect()
    }

    /// `|k|^s` for every coefficient with the convention `|0|^s = 0`.
    pub fn symbol(&self, s: f64) -> Vec<f64> {
        self.k_squared()
            .into_iter()
            .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(0.5 * s) })
            .collect()
    }

    /// Largest `|k|` present in the truncation (the corner `(-M/2, …)`).
    pub fn max_wavenumber_norm(&self) -> f64 {
        (self.points as f64 / 2.0) * (self.dim as f64).sqrt()
    }
}

pub(crate) fn axis_wavenumber(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

pub(crate) fn axis_index(k: i64, m: usize) -> usize {
    k.rem_euclid(m as i64) as usize
}

/// Truncated Fourier coefficients of a complex field on `T^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

/// Samples of a complex field at the grid nodes, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: TorusGrid,
    samples: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: TorusGrid) -> Self {
        SpectralField { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Coefficients in FFT order; the length must be `M^N`.
    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(FnlsError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// The constant field `c`.
    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        let mut f = SpectralField::zeros(grid);
        f.coeffs[0] = c;
        f
    }

    /// The plane wave `A e^{ik·x}`.
    pub fn plane_wave(grid: TorusGrid, amplitude: Complex64, k: &[i64]) -> Result<Self> {
        let mut f = SpectralField::zeros(grid);
        f.set_coeff(k, amplitude)?;
        Ok(f)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: &[i64]) -> Option<Complex64> {
        self.grid.flat_index(k).map(|i| self.coeffs[i])
    }

    pub fn set_coeff(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let i = self.grid.flat_index(k).ok_or_else(|| {
            FnlsError::InvalidParameter(format!("wavenumber {k:?} outside the truncation"))
        })?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Coefficient-wise multiplication by `m(k)`, given per flat index.
    pub fn map_multiplier(&self, mult: impl Fn(usize) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * mult(i))
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }

    pub fn scale(&self, a: Complex64) -> SpectralField {
        self.map_multiplier(|_| a)
    }

    /// `Σ|û(k)|²`, without the `(2π)^N` volume factor.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest coefficient-wise modulus difference.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_same_grid(&self, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "spectral fields live on different grids");
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.check_same_grid(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.check_same_grid(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        SpectralField { grid: self.grid, coeffs }
    }
}

impl Mul<&SpectralField> for Complex64 {
    type Output = SpectralField;
    fn mul(self, rhs: &SpectralField) -> SpectralField {
        rhs.scale(self)
    }
}

impl PhysicalField {
    pub fn from_samples(grid: TorusGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(FnlsError::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(PhysicalField { grid, samples })
    }

    /// Samples `f(x_j)` at every node.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let samples = (0..grid.len()).map(|j| f(&grid.node(j))).collect();
        PhysicalField { grid, samples }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Minimum of `|u|` over the nodes.
    pub fn min_modulus(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Maximum of `|u|` over the nodes.
    pub fn max_modulus(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// In-place N-dimensional FFT of a row-major `M^N` array (unnormalized).
fn fft_nd(data: &mut [Complex64], grid: &TorusGrid, direction: FftDirection) {
    let m = grid.points();
    let fft = plan(m, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if grid.dim() == 1 {
        fft.process_with_scratch(data, &mut scratch);
        return;
    }
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let total = data.len();
    for axis in 0..grid.dim() {
        let stride = m.pow((grid.dim() - 1 - axis) as u32);
        if stride == 1 {
            // contiguous last axis
            for chunk in data.chunks_exact_mut(m) {
                fft.process_with_scratch(chunk, &mut scratch);
            }
            continue;
        }
        let block = stride * m;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[start + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[start + i * stride] = *v;
                }
            }
        }
    }
}

/// `û(k) = M^{-N} Σ_j f(x_j) e^{-ik·x_j}`.
pub fn forward_transform(f: &PhysicalField) -> SpectralField {
    let mut data = f.samples.clone();
    fft_nd(&mut data, &f.grid, FftDirection::Forward);
    let norm = 1.0 / f.grid.len() as f64;
    for v in &mut data {
        *v *= norm;
    }
    SpectralField { grid: f.grid, coeffs: data }
}

/// `f(x_j) = Σ_k û(k) e^{ik·x_j}`.
pub fn inverse_transform(field: &SpectralField) -> PhysicalField {
    let mut data = field.coeffs.clone();
    fft_nd(&mut data, &field.grid, FftDirection::Inverse);
    PhysicalField { grid: field.grid, samples: data }
}

/// `(-Δ)^{s/2}` as the multiplier `|k|^s`.
pub fn fractional_laplacian(field: &SpectralField, s: f64) -> SpectralField {
    let symbol = field.grid.symbol(s);
    field.map_multiplier(|i| Complex64::new(symbol[i], 0.0))
}

/// Free group `e^{-it(-Δ)^{s/2}}`, i.e. the multiplier `exp(-i t |k|^s)`.
pub fn free_propagator(field: &SpectralField, s: f64, t: f64) -> SpectralField {
    let symbol = field.grid.symbol(s);
    field.map_multiplier(|i| Complex64::from_polar(1.0, -t * symbol[i]))
}

/// Zero-pad the coefficients onto a grid with `factor·M` points per axis.
pub fn zero_pad(field: &SpectralField, factor: usize) -> Result<SpectralField> {
    let fine = field.grid.refined(factor)?;
    if factor == 1 {
        return Ok(field.clone());
    }
    let mut out = SpectralField::zeros(fine);
    for (i, c) in field.coeffs.iter().enumerate() {
        let k = field.grid.wavenumber(i);
        let j = fine.flat_index(&k).expect("coarse band fits in the fine band");
        out.coeffs[j] = *c;
    }
    Ok(out)
}

/// Samples of the same trigonometric polynomial on the refined grid.
pub fn oversample(field: &SpectralField, factor: usize) -> Result<PhysicalField> {
    Ok(inverse_transform(&zero_pad(field, factor)?))
}

/// Forward transform on a fine grid followed by truncation to `coarse`'s band.
pub fn project(fine: &PhysicalField, coarse: &TorusGrid) -> Result<SpectralField> {
    if fine.grid.dim() != coarse.dim() || !fine.grid.points().is_multiple_of(coarse.points()) {
        return Err(FnlsError::GridMismatch(format!(
            "cannot project {:?} onto {:?}",
            fine.grid, coarse
        )));
    }
    let spec = forward_transform(fine);
    if fine.grid == *coarse {
        return Ok(spec);
    }
    let coeffs = (0..coarse.len())
        .map(|i| {
            let k = coarse.wavenumber(i);
            spec.coeffs[fine.grid.flat_index(&k).expect("coarse band fits in the fine band")]
        })
        .collect();
    Ok(SpectralField { grid: *coarse, coeffs })
}

/// Direct trigonometric summation `Σ_k û(k) e^{ik·x}` at an arbitrary point.
pub fn evaluate_at(field: &SpectralField, x: &[f64]) -> Complex64 {
    assert_eq!(x.len(), field.grid.dim());
    field
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| c.norm_sqr() > 0.0)
        .map(|(i, c)| {
            let phase: f64 = field
                .grid
                .wavenumber(i)
                .iter()
                .zip(x)
                .map(|(&k, &xa)| k as f64 * xa)
                .sum();
            c * Complex64::from_polar(1.0, phase)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_field(grid: TorusGrid, rng: &mut ChaCha8Rng) -> SpectralField {
        let coeffs = (0..grid.len())
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        SpectralField::from_coeffs(grid, coeffs).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(1, 3).is_err());
        assert!(TorusGrid::new(1, 2).is_err());
        assert!(TorusGrid::new(0, 8).is_err());
        assert!(TorusGrid::new(2, 8).is_ok());
    }

    #[test]
    fn wavenumber_layout() {
        let g = TorusGrid::new(1, 8).unwrap();
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)[0]).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        for i in 0..8 {
            assert_eq!(g.flat_index(&g.wavenumber(i)), Some(i));
        }
        assert_eq!(g.flat_index(&[4]), None);
    }

    #[test]
    fn forward_of_constant_and_mode() {
        let g = TorusGrid::new(2, 8).unwrap();
        let one = PhysicalField::from_fn(g, |_| c(1.0, 0.0));
        let f = forward_transform(&one);
        assert!((f.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(f.coeffs()[1..].iter().all(|z| z.norm() < 1e-15));

        let wave = PhysicalField::from_fn(g, |x| Complex64::from_polar(1.0, x[0]));
        let f = forward_transform(&wave);
        for i in 0..g.len() {
            let expect = if g.wavenumber(i) == vec![1, 0] { 1.0 } else { 0.0 };
            assert!((f.coeffs()[i] - c(expect, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn inverse_of_single_mode() {
        let g = TorusGrid::new(2, 8).unwrap();
        let amp = c(0.5, -1.5);
        let f = SpectralField::plane_wave(g, amp, &[2, -3]).unwrap();
        let p = inverse_transform(&f);
        for j in 0..g.len() {
            let x = g.node(j);
            let expect = amp * Complex64::from_polar(1.0, 2.0 * x[0] - 3.0 * x[1]);
            assert!((p.samples()[j] - expect).norm() < 1e-13);
        }
        let constant = inverse_transform(&SpectralField::constant(g, amp));
        assert!(constant.samples().iter().all(|z| (z - amp).norm() < 1e-15));
    }

    #[test]
    fn round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (dim, m) in [(1, 16), (2, 8), (3, 4)] {
            let g = TorusGrid::new(dim, m).unwrap();
            let f = random_field(g, &mut rng);
            let back = forward_transform(&inverse_transform(&f));
            let scale = f.coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(back.max_abs_diff(&f) <= 1e-12 * scale);

            let p = inverse_transform(&f);
            let again = inverse_transform(&forward_transform(&p));
            let err = p
                .samples()
                .iter()
                .zip(again.samples())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12 * p.max_modulus());
        }
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = TorusGrid::new(2, 8).unwrap();
        let f = random_field(g, &mut rng);
        let p = inverse_transform(&f);
        let spectral = (2.0 * PI).powi(2) * f.coeff_energy();
        let quad = g.spacing().powi(2) * p.samples().iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((spectral - quad).abs() <= 1e-12 * quad);
    }

    #[test]
    fn fractional_laplacian_symbol() {
        let g = TorusGrid::new(1, 16).unwrap();
        let constant = SpectralField::constant(g, c(3.0, 1.0));
        assert!(fractional_laplacian(&constant, 1.3).coeff_energy() == 0.0);

        let w1 = SpectralField::plane_wave(g, c(1.0, 0.0), &[1]).unwrap();
        assert!(fractional_laplacian(&w1, 1.0).max_abs_diff(&w1) < 1e-15);

        let w2 = SpectralField::plane_wave(g, c(1.0, 0.0), &[2]).unwrap();
        let out = fractional_laplacian(&w2, 0.5);
        assert!((out.coeff(&[2]).unwrap() - c(2f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn nyquist_uses_negative_representative() {
        let g = TorusGrid::new(1, 8).unwrap();
        let ny = SpectralField::plane_wave(g, c(1.0, 0.0), &[-4]).unwrap();
        let lap = fractional_laplacian(&ny, 2.0);
        assert!((lap.coeff(&[-4]).unwrap() - c(16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn propagator_group_laws() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = TorusGrid::new(2, 8).unwrap();
        let f = random_field(g, &mut rng);
        assert_eq!(free_propagator(&f, 1.5, 0.0), f);

        let constant = SpectralField::constant(g, c(2.0, 0.0));
        assert_eq!(free_propagator(&constant, 0.7, 123.0), constant);

        let back = free_propagator(&free_propagator(&f, 1.2, 0.37), 1.2, -0.37);
        assert!(back.max_abs_diff(&f) < 1e-13);

        let two = free_propagator(&free_propagator(&f, 0.8, 0.2), 0.8, 0.5);
        let one = free_propagator(&f, 0.8, 0.7);
        assert!(two.max_abs_diff(&one) < 1e-12);

        let e0 = f.coeff_energy();
        let e1 = free_propagator(&f, 2.0, 3.3).coeff_energy();
        assert!((e0 - e1).abs() <= 1e-14 * e0);

        let a = fractional_laplacian(&free_propagator(&f, 1.1, 0.4), 1.1);
        let b = free_propagator(&fractional_laplacian(&f, 1.1), 1.1, 0.4);
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn operations_are_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = TorusGrid::new(1, 16).unwrap();
        let f = random_field(g, &mut rng);
        let h = random_field(g, &mut rng);
        let (a, b) = (c(0.3, -1.2), c(-2.0, 0.5));
        let combo = &(a * &f) + &(b * &h);

        let lhs = free_propagator(&combo, 0.9, 0.6);
        let rhs = &(a * &free_propagator(&f, 0.9, 0.6)) + &(b * &free_propagator(&h, 0.9, 0.6));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);

        let lhs = fractional_laplacian(&combo, 1.7);
        let rhs = &(a * &fractional_laplacian(&f, 1.7)) + &(b * &fractional_laplacian(&h, 1.7));
        assert!(lhs.max_abs_diff(&rhs) < 1e-11);

        let lhs = forward_transform(&inverse_transform(&combo));
        assert!(lhs.max_abs_diff(&combo) < 1e-12);
    }

    #[test]
    fn oversample_evaluates_same_polynomial() {
        let g = TorusGrid::new(1, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_field(g, &mut rng);
        assert_eq!(oversample(&f, 1).unwrap(), inverse_transform(&f));

        let constant = SpectralField::constant(g, c(1.5, 0.5));
        let fine = oversample(&constant, 3).unwrap();
        assert_eq!(fine.grid().points(), 24);
        assert!(fine.samples().iter().all(|z| (z - c(1.5, 0.5)).norm() < 1e-14));

        let w = SpectralField::plane_wave(g, c(1.0, 0.0), &[1]).unwrap();
        let fine = oversample(&w, 2).unwrap();
        for (j, z) in fine.samples().iter().enumerate() {
            let x = fine.grid().node(j)[0];
            assert!((z - Complex64::from_polar(1.0, x)).norm() < 1e-14);
        }

        for (j, z) in oversample(&f, 3).unwrap().samples().iter().enumerate() {
            let x = g.refined(3).unwrap().node(j);
            assert!((z - evaluate_at(&f, &x)).norm() < 1e-12);
        }

        let back = project(&oversample(&f, 4).unwrap(), &g).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-13);
    }
}
