//! Mass, energy and the per-record timeline.
//!
//! `M[u] = ∫|u|²` and `E[u] = ½∫|(-Δ)^{s/4}u|² - ∫ Re 𝐍(|u|)` with
//! `𝐍(τ) = ∫ 𝒩(ν) ν dν` (see [`big_n_antiderivative`] for the lower limit).

use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};
use crate::nonlinearity::{big_n_antiderivative, NonlinearitySpec};
use crate::norms::{certified_infimum, sobolev_norm_spectral};
use crate::solver::Trajectory;
use crate::spectral::{oversample, SpectralField};

fn volume(dim: usize) -> f64 {
    std::f64::consts::TAU.powi(dim as i32)
}

/// `(2π)^N Σ|û(k)|²`.
pub fn mass(field: &SpectralField) -> f64 {
    volume(field.grid().dim()) * field.coeff_energy()
}

/// `½(2π)^N Σ|k|^s|û|²`.
pub fn kinetic_energy(field: &SpectralField, s: f64) -> f64 {
    let symbol = field.grid().symbol(s);
    let sum: f64 = field.coeffs().iter().zip(symbol).map(|(c, m)| m * c.norm_sqr()).sum();
    0.5 * volume(field.grid().dim()) * sum
}

/// `∫ Re 𝐍(|u|)` by the rectangle rule on the grid refined by
/// `oversample_factor` (spectrally accurate for smooth periodic integrands).
pub fn potential_energy(
    field: &SpectralField,
    spec: &NonlinearitySpec,
    oversample_factor: usize,
) -> Result<f64> {
    if spec.is_singular() && certified_infimum(field, oversample_factor.max(2))? <= 0.0 {
        return Err(FnlsError::Domain { label: spec.label().to_string(), x: 0.0 });
    }
    let fine = oversample(field, oversample_factor)?;
    let cell = volume(field.grid().dim()) / fine.grid().len() as f64;
    let mut sum = 0.0;
    for z in fine.samples() {
        let r = z.norm();
        if r > 0.0 {
            sum += big_n_antiderivative(spec, r)?.value.re;
        } else {
            // regular specs only; the antiderivative from 0 vanishes at 0
            sum += big_n_antiderivative(spec, f64::MIN_POSITIVE).map(|a| a.value.re).unwrap_or(0.0);
        }
    }
    Ok(cell * sum)
}

pub fn energy(
    field: &SpectralField,
    spec: &NonlinearitySpec,
    s: f64,
    oversample_factor: usize,
) -> Result<f64> {
    Ok(kinetic_energy(field, s) - potential_energy(field, spec, oversample_factor)?)
}

/// One row of the timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub h_j_norm: f64,
    pub inf_bound: f64,
    /// `η · inf |u|` with the `η` of the window the record closes; `NaN`
    /// when no `η` is defined (vanishing data for a regular nonlinearity).
    pub eta_times_inf: f64,
}

impl ConservationRecord {
    pub const CSV_HEADER: &'static str = "t,mass,energy,h_j_norm,inf_bound,eta_times_inf";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            self.t, self.mass, self.energy, self.h_j_norm, self.inf_bound, self.eta_times_inf
        )
    }

    pub fn json_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Conservation record for every stored state of a trajectory.
pub fn timeline(
    traj: &Trajectory,
    spec: &NonlinearitySpec,
    s: f64,
    j: u32,
    oversample_factor: usize,
) -> Result<Vec<ConservationRecord>> {
    traj.times
        .iter()
        .zip(&traj.fields)
        .zip(&traj.norms)
        .zip(&traj.etas)
        .map(|(((&t, f), n), eta)| {
            Ok(ConservationRecord {
                t,
                mass: mass(f),
                energy: energy(f, spec, s, oversample_factor)?,
                h_j_norm: sobolev_norm_spectral(f, j as f64),
                inf_bound: n.inf_lower_bound,
                eta_times_inf: eta.map_or(f64::NAN, |e| e * n.inf_lower_bound),
            })
        })
        .collect()
}

/// Largest relative deviation of `values` from the first entry.
pub fn relative_drift(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = values.into_iter();
    let Some(first) = it.next() else { return 0.0 };
    let scale = first.abs().max(f64::MIN_POSITIVE);
    it.map(|v| (v - first).abs() / scale).fold(0.0, f64::max)
}
