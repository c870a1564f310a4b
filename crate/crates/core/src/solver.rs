//! Picard iteration on the Duhamel formulation
//!
//! `u(t₀+τ) = e^{-iτΛ} [u(t₀) + i ∫₀^τ e^{iσΛ} P(𝒩(|u|)u)(t₀+σ) dσ]`,
//! `Λ = (-Δ)^{s/2}`, solved window by window, plus an RK4 method-of-lines
//! integrator used as an independent reference.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, MembershipFailure, Result};
use crate::estimates::{existence_window, EstimateConstants, WellPosednessWindow};
use crate::nonlinearity::{apply_nonlinear_term, NonlinearitySpec};
use crate::norms::{
    certified_infimum, embedding_constant_c1, power_estimate_c1, sobolev_norm_spectral, NormReport,
};
use crate::quadrature::{gauss_integration_matrix, gauss_legendre};
use crate::spectral::{free_propagator, SpectralField, TorusGrid};

/// Grids at least this large evaluate the nonlinear term of the nodes in parallel.
const PARALLEL_NODES_MIN_LEN: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    /// Composite trapezoid on equispaced nodes.
    #[default]
    Trapezoid,
    /// Gauss–Legendre collocation.
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub s: f64,
    pub j: u32,
    /// Cap each window at the certified existence time.
    pub use_certified_t: bool,
    pub max_window: f64,
    pub quad_nodes: usize,
    pub quadrature: QuadratureRule,
    /// Absolute tolerance on `sup_nodes ‖u⁽ᵐ⁺¹⁾ - u⁽ᵐ⁾‖_{H^J}`.
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    /// Refinement factor for evaluating `𝒩(|u|)u`.
    pub oversample_factor: usize,
    /// Refinement factor for certified infima.
    pub certify_oversample: usize,
    /// Upper bound on the number of windows in one integration.
    pub max_windows: usize,
    pub constants: WindowConstants,
}

/// Constants for certified windows; `c1 = None` computes the embedding
/// constants from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConstants {
    pub c: f64,
    pub c_lemma: f64,
    pub c0: f64,
    pub c_beta: crate::estimates::CBetaPolicy,
    pub c1: Option<f64>,
}

impl Default for WindowConstants {
    fn default() -> Self {
        WindowConstants {
            c: 1.0,
            c_lemma: 1.0,
            c0: 1.0,
            c_beta: Default::default(),
            c1: None,
        }
    }
}

impl WindowConstants {
    pub fn resolve(&self, grid: &TorusGrid, j: u32) -> Result<EstimateConstants> {
        let (c1_embed, c1_power) = match self.c1 {
            Some(v) => (v, v.max(1.0)),
            None => (embedding_constant_c1(j, grid.dim(), grid)?, power_estimate_c1(grid).c1),
        };
        Ok(EstimateConstants {
            c: self.c,
            c_lemma: self.c_lemma,
            c0: self.c0,
            c_beta: self.c_beta,
            c1_embed,
            c1_power,
        })
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            s: 1.0,
            j: 2,
            use_certified_t: false,
            max_window: 0.01,
            quad_nodes: 8,
            quadrature: QuadratureRule::Trapezoid,
            picard_tol: 1e-11,
            picard_max_iters: 200,
            oversample_factor: 2,
            certify_oversample: 4,
            max_windows: 1_000_000,
            constants: WindowConstants::default(),
        }
    }
}

impl SolverConfig {
    /// All constraint violations, empty when the configuration is usable on
    /// a grid of dimension `dim`.
    pub fn violations(&self, dim: usize) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.s > 0.0) || !self.s.is_finite() {
            v.push(format!("s must be positive, got {}", self.s));
        }
        if self.j == 0 {
            v.push("J must be a positive integer".into());
        }
        if self.use_certified_t && !((self.j as f64) > dim as f64 / 2.0 + self.s) {
            v.push(format!(
                "certified windows need J > N/2 + s, got J = {}, N = {dim}, s = {}",
                self.j, self.s
            ));
        }
        if !(self.max_window > 0.0) || !self.max_window.is_finite() {
            v.push(format!("max_window must be positive, got {}", self.max_window));
        }
        let min_nodes = match self.quadrature {
            QuadratureRule::Trapezoid => 2,
            QuadratureRule::GaussLegendre => 1,
        };
        if self.quad_nodes < min_nodes {
            v.push(format!("quad_nodes must be at least {min_nodes}, got {}", self.quad_nodes));
        }
        if !(self.picard_tol > 0.0) {
            v.push(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iters == 0 {
            v.push("picard_max_iters must be positive".into());
        }
        if self.oversample_factor == 0 {
            v.push("oversample_factor must be positive".into());
        }
        if self.certify_oversample < 2 {
            v.push("certify_oversample must be at least 2".into());
        }
        if self.max_windows == 0 {
            v.push("max_windows must be positive".into());
        }
        v
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let v = self.violations(dim);
        if v.is_empty() {
            Ok(())
        } else {
            Err(FnlsError::Config(v.join("; ")))
        }
    }
}

/// Time nodes of one window (offsets from `t₀`, first `0`, last `h`) and the
/// cumulative quadrature matrix: `∫₀^{τ_i} g ≈ Σ_j A_ij g(τ_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowNodes {
    pub t0: f64,
    pub h: f64,
    pub taus: Vec<f64>,
    weights: Vec<Vec<f64>>,
    /// Nodes whose integrand value is used.
    active: Vec<bool>,
}

impl WindowNodes {
    pub fn new(t0: f64, h: f64, rule: QuadratureRule, q: usize) -> Self {
        match rule {
            QuadratureRule::Trapezoid => {
                let q = q.max(2);
                let dt = h / (q - 1) as f64;
                let taus = (0..q).map(|i| i as f64 * dt).collect();
                let weights = (0..q)
                    .map(|i| {
                        (0..q)
                            .map(|j| {
                                if i == 0 || j > i {
                                    0.0
                                } else if j == 0 || j == i {
                                    0.5 * dt
                                } else {
                                    dt
                                }
                            })
                            .collect()
                    })
                    .collect();
                WindowNodes { t0, h, taus, weights, active: vec![true; q] }
            }
            QuadratureRule::GaussLegendre => {
                let (x, w) = gauss_legendre(q);
                let s = gauss_integration_matrix(&x, &w);
                let n = q + 2;
                let mut taus = vec![0.0];
                taus.extend(x.iter().map(|&xi| xi * h));
                taus.push(h);
                let mut weights = vec![vec![0.0; n]; n];
                for i in 0..q {
                    for j in 0..q {
                        weights[i + 1][j + 1] = h * s[i][j];
                    }
                }
                for j in 0..q {
                    weights[n - 1][j + 1] = h * w[j];
                }
                let mut active = vec![true; n];
                active[0] = false;
                active[n - 1] = false;
                WindowNodes { t0, h, taus, weights, active }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }
}

/// Free flow of `u_start` at every node.
pub fn free_path(u_start: &SpectralField, s: f64, nodes: &WindowNodes) -> Vec<SpectralField> {
    nodes.taus.iter().map(|&t| free_propagator(u_start, s, t)).collect()
}

/// One application of the Duhamel map `Φ` at the window nodes.
pub fn picard_sweep(
    u_path: &[SpectralField],
    u_start: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    nodes: &WindowNodes,
) -> Result<Vec<SpectralField>> {
    if u_path.len() != nodes.len() {
        return Err(FnlsError::InvalidParameter(format!(
            "path has {} states for {} nodes",
            u_path.len(),
            nodes.len()
        )));
    }
    let symbol = u_start.grid().symbol(config.s);
    let twisted_term = |j: usize| -> Result<Option<SpectralField>> {
        if !nodes.active[j] {
            return Ok(None);
        }
        let f = apply_nonlinear_term(spec, &u_path[j], config.oversample_factor)?;
        let tau = nodes.taus[j];
        // i e^{iτΛ} P(𝒩(|u|)u)
        Ok(Some(f.map_multiplier(|k| Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, tau * symbol[k]))))
    };
    let terms: Vec<Option<SpectralField>> = if u_start.grid().len() >= PARALLEL_NODES_MIN_LEN {
        (0..nodes.len()).into_par_iter().map(twisted_term).collect::<Result<_>>()?
    } else {
        (0..nodes.len()).map(twisted_term).collect::<Result<_>>()?
    };
    let mut out = Vec::with_capacity(nodes.len());
    for (i, &tau) in nodes.taus.iter().enumerate() {
        let mut w = u_start.clone();
        for (j, term) in terms.iter().enumerate() {
            let a = nodes.weights[i][j];
            if a == 0.0 {
                continue;
            }
            if let Some(g) = term {
                for (wc, gc) in w.coeffs_mut().iter_mut().zip(g.coeffs()) {
                    *wc += a * gc;
                }
            }
        }
        out.push(free_propagator(&w, config.s, tau));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    pub t0: f64,
    pub length: f64,
    pub iterations: usize,
    /// `d_m = sup_nodes ‖u⁽ᵐ⁾ - u⁽ᵐ⁻¹⁾‖_{H^J}`, `m = 1, 2, …`.
    pub diffs: Vec<f64>,
    /// `ρ_m = d_m / d_{m-1}` for `m >= 2`.
    pub ratios: Vec<f64>,
    pub converged: bool,
}

impl PicardReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratios.iter().copied().reduce(f64::max)
    }
}

/// Ball that the converged path must stay in: `sup ‖u‖_{H^J} <= radius` and,
/// when `eta` is set, `η · inf |u| >= 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub radius: f64,
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSolution {
    pub nodes: WindowNodes,
    pub path: Vec<SpectralField>,
    /// Smallest `η · inf |u|` over the nodes, when checked.
    pub min_eta_times_inf: Option<f64>,
}

impl WindowSolution {
    pub fn end(&self) -> &SpectralField {
        self.path.last().expect("windows have at least two nodes")
    }
}

/// Fixed-point iteration on one window starting from the free flow, then
/// the ball check on the converged path.
pub fn solve_window(
    u_start: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    t0: f64,
    h: f64,
    ball: Ball,
) -> Result<(WindowSolution, PicardReport)> {
    let nodes = WindowNodes::new(t0, h, config.quadrature, config.quad_nodes);
    let j = config.j as f64;
    let mut path = free_path(u_start, config.s, &nodes);
    let mut report = PicardReport {
        t0,
        length: h,
        iterations: 0,
        diffs: Vec::new(),
        ratios: Vec::new(),
        converged: false,
    };
    while report.iterations < config.picard_max_iters {
        let next = picard_sweep(&path, u_start, spec, config, &nodes)?;
        let d = path
            .iter()
            .zip(&next)
            .map(|(a, b)| sobolev_norm_spectral(&(a - b), j))
            .fold(0.0, f64::max);
        if !d.is_finite() {
            return Err(FnlsError::NonFinite("Picard iterate"));
        }
        if let Some(&prev) = report.diffs.last() {
            report.ratios.push(if prev > 0.0 { d / prev } else { 0.0 });
        }
        report.diffs.push(d);
        report.iterations += 1;
        path = next;
        if d <= config.picard_tol {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        return Err(FnlsError::PicardNonConvergence {
            iterations: report.iterations,
            last_diff: report.diffs.last().copied().unwrap_or(f64::NAN),
        });
    }
    let mut min_eta_times_inf = None;
    for (u, tau) in path.iter().zip(&nodes.taus) {
        let norm = sobolev_norm_spectral(u, j);
        if norm > ball.radius {
            return Err(FnlsError::Membership(MembershipFailure::NormBall {
                t: t0 + tau,
                norm,
                radius: ball.radius,
            }));
        }
        if let Some(eta) = ball.eta {
            let v = eta * certified_infimum(u, config.certify_oversample)?;
            if v < 0.5 {
                return Err(FnlsError::Membership(MembershipFailure::InfimumFloor {
                    t: t0 + tau,
                    eta_times_inf: v,
                }));
            }
            min_eta_times_inf = Some(min_eta_times_inf.map_or(v, |m: f64| m.min(v)));
        }
    }
    Ok((WindowSolution { nodes, path, min_eta_times_inf }, report))
}

/// Why an integration ended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    /// A window left the ball; the offending window was discarded.
    Membership { failure: MembershipFailure },
    PicardNonConvergence { t: f64, iterations: usize, last_diff: f64 },
    /// The state at a window start has no positive certified infimum.
    NonVanishing { t: f64, certified_inf: f64 },
    WindowBudget { windows: usize },
}

impl StopReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, StopReason::Completed)
    }
}

/// States at window boundaries. Times run monotonically away from the
/// start, decreasing for backward integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    pub norms: Vec<NormReport>,
    /// `η` in force at each stored time (`1/inf` at the start of its window).
    pub etas: Vec<Option<f64>>,
    /// Certified windows used, when the window length was certified.
    pub windows: Vec<Option<WellPosednessWindow>>,
    pub stop: StopReason,
}

impl Trajectory {
    pub fn final_state(&self) -> &SpectralField {
        self.fields.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial state")
    }
}

/// Per-window timing: window lengths are taken from this schedule instead of
/// being recomputed.
fn next_length(
    u: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    consts: &EstimateConstants,
    eta: Option<f64>,
    remaining: f64,
) -> Result<(f64, Option<WellPosednessWindow>)> {
    let mut len = config.max_window.min(remaining);
    let mut window = None;
    if config.use_certified_t {
        let norm = sobolev_norm_spectral(u, config.j as f64);
        if let Some(eta) = eta {
            let w = existence_window(spec, norm, eta, config.j, u.grid().dim(), consts)?;
            len = len.min(w.t);
            window = Some(w);
        }
    }
    Ok((len, window))
}

fn eta_at(u: &SpectralField, config: &SolverConfig) -> Result<Option<f64>> {
    let inf = certified_infimum(u, config.certify_oversample)?;
    Ok((inf > 0.0).then(|| 1.0 / inf))
}

/// Chain windows from `u0` until `|total_t|` is covered or a window fails.
///
/// Window lengths are `min(certified T, max_window)` (just `max_window`
/// without certification) and never overshoot `total_t`. Errors only when
/// the initial data already violates the non-vanishing condition for a
/// singular nonlinearity or the configuration is invalid.
pub fn integrate(
    u0: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    total_t: f64,
) -> Result<(Trajectory, Vec<PicardReport>)> {
    integrate_impl(u0, spec, config, total_t, None)
}

/// As [`integrate`], with window boundaries fixed to `schedule` (offsets
/// from 0, starting at 0, monotone).
pub fn integrate_on_schedule(
    u0: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    schedule: &[f64],
) -> Result<(Trajectory, Vec<PicardReport>)> {
    let total = schedule.last().copied().unwrap_or(0.0);
    integrate_impl(u0, spec, config, total, Some(schedule))
}

fn integrate_impl(
    u0: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    total_t: f64,
    schedule: Option<&[f64]>,
) -> Result<(Trajectory, Vec<PicardReport>)> {
    let grid = *u0.grid();
    config.validate(grid.dim())?;
    if !total_t.is_finite() {
        return Err(FnlsError::InvalidParameter(format!("total time {total_t}")));
    }
    let singular = spec.is_singular();
    let eta0 = eta_at(u0, config)?;
    if singular && eta0.is_none() {
        return Err(FnlsError::NonVanishing {
            certified_inf: certified_infimum(u0, config.certify_oversample)?,
        });
    }
    let consts = if config.use_certified_t {
        config.constants.resolve(&grid, config.j)?
    } else {
        EstimateConstants::default()
    };
    let j = config.j;
    let direction = if total_t < 0.0 { -1.0 } else { 1.0 };
    let span = total_t.abs();

    let mut traj = Trajectory {
        times: vec![0.0],
        fields: vec![u0.clone()],
        norms: vec![NormReport::compute(u0, j, config.certify_oversample)?],
        etas: vec![eta0],
        windows: Vec::new(),
        stop: StopReason::Completed,
    };
    let mut reports = Vec::new();
    let mut u = u0.clone();
    let mut elapsed = 0.0f64;
    let mut windows = 0usize;
    loop {
        let remaining = match schedule {
            Some(s) => match s.get(windows + 1) {
                Some(&next) => (next - s[windows]).abs(),
                None => 0.0,
            },
            None => span - elapsed,
        };
        // guard against a sliver left by rounding
        if remaining <= 1e-14 * span.max(1.0) {
            break;
        }
        if windows >= config.max_windows {
            traj.stop = StopReason::WindowBudget { windows };
            break;
        }
        let eta = eta_at(&u, config)?;
        if singular && eta.is_none() {
            traj.stop = StopReason::NonVanishing {
                t: direction * elapsed,
                certified_inf: certified_infimum(&u, config.certify_oversample)?,
            };
            break;
        }
        let (len, window) = if schedule.is_some() {
            (remaining, None)
        } else {
            next_length(&u, spec, config, &consts, eta, remaining)?
        };
        let ball = Ball {
            radius: 2.0 * sobolev_norm_spectral(&u, j as f64),
            eta: if singular { eta } else { None },
        };
        let t0 = direction * elapsed;
        match solve_window(&u, spec, config, t0, direction * len, ball) {
            Ok((sol, report)) => {
                reports.push(report);
                u = sol.end().clone();
                elapsed = match schedule {
                    Some(s) => s[windows + 1].abs(),
                    None => elapsed + len,
                };
                windows += 1;
                traj.times.push(direction * elapsed);
                traj.norms.push(NormReport::compute(&u, j, config.certify_oversample)?);
                traj.fields.push(u.clone());
                traj.etas.push(eta);
                traj.windows.push(window);
            }
            Err(FnlsError::Membership(failure)) => {
                traj.stop = StopReason::Membership { failure };
                break;
            }
            Err(FnlsError::PicardNonConvergence { iterations, last_diff }) => {
                traj.stop = StopReason::PicardNonConvergence { t: t0, iterations, last_diff };
                break;
            }
            Err(FnlsError::NonVanishing { certified_inf }) => {
                traj.stop = StopReason::NonVanishing { t: t0, certified_inf };
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((traj, reports))
}

/// `û' = -i|k|^s û + i P(𝒩(|u|)u)`.
fn rhs(u: &SpectralField, spec: &NonlinearitySpec, symbol: &[f64], oversample: usize) -> Result<SpectralField> {
    let f = apply_nonlinear_term(spec, u, oversample)?;
    let i = Complex64::new(0.0, 1.0);
    let coeffs = u
        .coeffs()
        .iter()
        .zip(f.coeffs())
        .zip(symbol)
        .map(|((&uc, &fc), &m)| i * (fc - m * uc))
        .collect();
    SpectralField::from_coeffs(*u.grid(), coeffs)
}

fn axpy(u: &SpectralField, a: f64, k: &SpectralField) -> SpectralField {
    let coeffs = u.coeffs().iter().zip(k.coeffs()).map(|(x, y)| x + a * y).collect();
    SpectralField::from_coeffs(*u.grid(), coeffs).expect("same grid")
}

/// Classical RK4 on the truncated Fourier system with `⌈|T|/dt⌉` equal steps.
pub fn rk4_oracle(
    u0: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    t: f64,
    dt: f64,
) -> Result<SpectralField> {
    if !(dt > 0.0) {
        return Err(FnlsError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let symbol = u0.grid().symbol(config.s);
    let stiffness = dt * symbol.iter().copied().fold(0.0, f64::max);
    if stiffness > 0.5 {
        return Err(FnlsError::StepSize { stiffness });
    }
    if t == 0.0 {
        return Ok(u0.clone());
    }
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let os = config.oversample_factor;
    let mut u = u0.clone();
    for _ in 0..steps {
        let k1 = rhs(&u, spec, &symbol, os)?;
        let k2 = rhs(&axpy(&u, 0.5 * h, &k1), spec, &symbol, os)?;
        let k3 = rhs(&axpy(&u, 0.5 * h, &k2), spec, &symbol, os)?;
        let k4 = rhs(&axpy(&u, h, &k3), spec, &symbol, os)?;
        let coeffs = u
            .coeffs()
            .iter()
            .zip(k1.coeffs())
            .zip(k2.coeffs())
            .zip(k3.coeffs())
            .zip(k4.coeffs())
            .map(|((((x, a), b), c), d)| x + h / 6.0 * (a + 2.0 * b + 2.0 * c + d))
            .collect();
        u = SpectralField::from_coeffs(*u.grid(), coeffs)?;
    }
    Ok(u)
}

/// `sup_t ‖u(t) - v(t)‖_{H^J} / ‖u₀ - v₀‖_{H^J}` over the window boundaries of
/// the integration of `u0` up to `t`; `v0` is integrated on the same schedule.
pub fn lipschitz_probe(
    u0: &SpectralField,
    v0: &SpectralField,
    spec: &NonlinearitySpec,
    config: &SolverConfig,
    t: f64,
) -> Result<f64> {
    let j = config.j as f64;
    let d0 = sobolev_norm_spectral(&(u0 - v0), j);
    if d0 == 0.0 {
        return Err(FnlsError::IdenticalData);
    }
    let (tu, _) = integrate(u0, spec, config, t)?;
    let (tv, _) = integrate_on_schedule(v0, spec, config, &tu.times)?;
    let n = tu.fields.len().min(tv.fields.len());
    if n < tu.fields.len() {
        return Err(FnlsError::InvalidParameter(format!(
            "perturbed integration stopped early: {:?}",
            tv.stop
        )));
    }
    let mut ratio = 0.0f64;
    for (a, b) in tu.fields.iter().zip(&tv.fields).take(n) {
        ratio = ratio.max(sobolev_norm_spectral(&(a - b), j) / d0);
    }
    Ok(ratio)
}
