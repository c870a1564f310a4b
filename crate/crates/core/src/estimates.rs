//! Explicit estimate functions for the nonlinear term and the local
//! existence windows derived from the contraction inequalities.
//!
//! Norms `‖u‖` below are `H^J` norms in the spectral convention of
//! [`crate::norms::sobolev_norm_spectral`].

use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};
use crate::nonlinearity::{
    apply_nonlinear_term, log_space, CjKind, CjNonlinearity, NonlinearitySpec,
    SeriesNonlinearity,
};
use crate::norms::{certified_infimum, multi_indices, sobolev_norm_spectral, DEFAULT_CERTIFY_OVERSAMPLE};
use crate::spectral::SpectralField;

/// Samples used by [`sup_n`] when no monotonicity argument applies.
pub const SUP_SAMPLES: usize = 1 << 12;

/// Oversampling used when evaluating `𝒩(|u|)u` for constant fitting.
pub const FIT_OVERSAMPLE: usize = 4;

/// How to evaluate `𝒮𝒩` for functions without a closed-form maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupMode {
    /// Best sampled value after local refinement.
    #[default]
    Sampled,
    /// Sampled value plus a Lipschitz margin from the sampled derivative.
    UpperBound,
}

fn sup_by_sampling(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    mode: SupMode,
) -> f64 {
    if lo == hi {
        return f(lo);
    }
    let xs: Vec<f64> = log_space(lo, hi, SUP_SAMPLES).collect();
    let (mut best_i, mut best) = (0, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement on the bracket around the best sample
    let (mut a, mut b) = (xs[best_i.saturating_sub(1)], xs[(best_i + 1).min(xs.len() - 1)]);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    best = best.max(fc).max(fd);
    if mode == SupMode::UpperBound {
        let mut margin = 0.0f64;
        for w in xs.windows(2) {
            let slope = df(w[0]).abs().max(df(w[1]).abs());
            margin = margin.max(0.5 * slope * (w[1] - w[0]));
        }
        best += margin;
    }
    best
}

fn is_monotone_series(s: &SeriesNonlinearity) -> bool {
    let nonneg = s.terms().iter().all(|t| t.coeff.im == 0.0 && t.coeff.re >= 0.0);
    let pos = s.terms().iter().all(|t| t.exponent >= 0.0);
    let neg = s.terms().iter().all(|t| t.exponent <= 0.0);
    nonneg && (pos || neg)
}

/// `𝒮𝒩 = sup |𝒩(x)|` over `[1/η, upper]`.
pub fn sup_n_with(spec: &NonlinearitySpec, eta: f64, upper: f64, mode: SupMode) -> Result<f64> {
    let lo = 1.0 / eta;
    if !(eta > 0.0) || !(lo <= upper) || !upper.is_finite() {
        return Err(FnlsError::EmptyInterval { lower: lo, upper });
    }
    let endpoints = |f: &dyn Fn(f64) -> f64| f(lo).max(f(upper));
    let value = match spec {
        NonlinearitySpec::Cj(c) => match c.kind() {
            CjKind::Power { .. } | CjKind::Log | CjKind::Log1p { .. } => {
                endpoints(&|x| c.eval(x).norm())
            }
            CjKind::Custom(_) => sup_by_sampling(
                &|x| c.eval(x).norm(),
                &|x| c.deriv(1, x).norm(),
                lo,
                upper,
                mode,
            ),
        },
        NonlinearitySpec::Series(s) if is_monotone_series(s) => endpoints(&|x| s.eval(x).value.norm()),
        NonlinearitySpec::Series(s) => sup_by_sampling(
            &|x| s.eval(x).value.norm(),
            &|x| s.deriv(1, x).norm(),
            lo,
            upper,
            mode,
        ),
    };
    if !value.is_finite() {
        return Err(FnlsError::NonFinite("sup of |N|"));
    }
    Ok(value)
}

pub fn sup_n(spec: &NonlinearitySpec, eta: f64, upper: f64) -> Result<f64> {
    sup_n_with(spec, eta, upper, SupMode::Sampled)
}

/// `K(J, γ)`: the largest of `|γ-2p₂|+2p₂`, `|γ-p₁-1|+|p₁-2p₂|+2p₂+1` and
/// `|p₁-2p₂-1|+2p₂+2` over `0 <= p₁, p₂ <= J`.
pub fn k_constant(j: u32, gamma: f64) -> f64 {
    let mut k = 0.0f64;
    for p1 in 0..=j {
        for p2 in 0..=j {
            let (p1, p2) = (p1 as f64, p2 as f64);
            k = k
                .max((gamma - 2.0 * p2).abs() + 2.0 * p2)
                .max((gamma - p1 - 1.0).abs() + (p1 - 2.0 * p2).abs() + 2.0 * p2 + 1.0)
                .max((p1 - 2.0 * p2 - 1.0).abs() + 2.0 * p2 + 2.0);
        }
    }
    k
}

fn require_cj(spec: &NonlinearitySpec) -> Result<&CjNonlinearity> {
    match spec {
        NonlinearitySpec::Cj(c) => Ok(c),
        NonlinearitySpec::Series(_) => Err(FnlsError::NotCjClass),
    }
}

fn require_embedding(j: u32, dim: usize) -> Result<()> {
    if 2 * j as usize <= dim {
        Err(FnlsError::EmbeddingHypothesis { j, dim })
    } else {
        Ok(())
    }
}

/// `𝒮𝒩(η, C₁‖u‖)` with the upper endpoint raised to `1/η` when the
/// embedding bound falls below it (e.g. `‖u‖ = 0`).
fn sn_term(spec: &NonlinearitySpec, eta: f64, c1: f64, norm: f64) -> Result<f64> {
    sup_n(spec, eta, (c1 * norm).max(1.0 / eta))
}

fn g_base(
    spec: &NonlinearitySpec,
    eta: f64,
    norms: &[f64],
    j: u32,
    dim: usize,
    c1: f64,
) -> Result<(f64, f64)> {
    let cj = require_cj(spec)?;
    require_embedding(j, dim)?;
    let mut base = 1.0 + eta;
    for &n in norms {
        base += n + sn_term(spec, eta, c1, n)?;
    }
    Ok((base, k_constant(j, cj.gamma())))
}

/// `𝒢₁(η, ‖u‖) = c (1 + η + ‖u‖ + 𝒮𝒩(η, C₁‖u‖))^{K(J,γ)}`.
pub fn g1(
    spec: &NonlinearitySpec,
    eta: f64,
    norm_u: f64,
    j: u32,
    dim: usize,
    c: f64,
    c1: f64,
) -> Result<f64> {
    let (base, k) = g_base(spec, eta, &[norm_u], j, dim, c1)?;
    finite(c * base.powf(k), "G1")
}

/// `𝒢₂(η, ‖u‖, ‖v‖)`, with both norms and both `𝒮𝒩` terms in the base.
#[allow(clippy::too_many_arguments)]
pub fn g2(
    spec: &NonlinearitySpec,
    eta: f64,
    norm_u: f64,
    norm_v: f64,
    j: u32,
    dim: usize,
    c: f64,
    c1: f64,
) -> Result<f64> {
    let (base, k) = g_base(spec, eta, &[norm_u, norm_v], j, dim, c1)?;
    finite(c * base.powf(k), "G2")
}

fn finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(FnlsError::NonFinite(what))
    }
}

/// `C(γ, p) = |γ(γ-2)…(γ-2(p-1))|`, with `C(γ, 0) = 1`.
pub fn c_coeff(gamma: f64, p: u32) -> f64 {
    (0..p).map(|j| (gamma - 2.0 * j as f64).abs()).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesConvergenceReport {
    pub r0: f64,
    /// Partial sums after each term.
    pub partial_sums: Vec<f64>,
    pub converged: bool,
    /// Trailing increments grew for at least [`DIVERGENCE_RUN`] terms without
    /// the sum converging.
    pub divergent: bool,
    /// Final partial sum.
    pub bound: f64,
}

/// Length of a growing run of increments that marks a series as divergent.
pub const DIVERGENCE_RUN: usize = 8;

/// Accumulate `Σ_k Σ_{p<=J} C(γ_k,p)|a_k|(R₀^{|γ_k-2p|} + |γ_k-2p| R₀^{|γ_k-2p-1|})`.
///
/// Finite sums are always reported converged; truncated series converge once
/// three consecutive increments fall below the tail tolerance.
pub fn series_condition(
    series: &SeriesNonlinearity,
    r0: f64,
    j: u32,
) -> Result<SeriesConvergenceReport> {
    if !(r0 > 0.0) || !r0.is_finite() {
        return Err(FnlsError::InvalidParameter(format!("R0 must be positive, got {r0}")));
    }
    let tol = series.truncation().tail_tol;
    let mut partial_sums = Vec::with_capacity(series.terms().len());
    let mut sum = 0.0;
    let mut small_run = 0;
    let mut grow_run = 0;
    let mut prev = f64::INFINITY;
    let mut converged = series.is_exact();
    for t in series.terms() {
        let a = t.coeff.norm();
        let mut inc = 0.0;
        for p in 0..=j {
            let e = (t.exponent - 2.0 * p as f64).abs();
            let e1 = (t.exponent - 2.0 * p as f64 - 1.0).abs();
            inc += c_coeff(t.exponent, p) * a * (r0.powf(e) + e * r0.powf(e1));
        }
        sum += inc;
        partial_sums.push(sum);
        grow_run = if inc > prev { grow_run + 1 } else { 0 };
        prev = inc;
        small_run = if inc < tol { small_run + 1 } else { 0 };
        if !series.is_exact() && small_run >= 3 {
            converged = true;
            break;
        }
    }
    if !sum.is_finite() {
        converged = false;
    }
    let divergent = !converged && (grow_run >= DIVERGENCE_RUN || !sum.is_finite());
    Ok(SeriesConvergenceReport { r0, partial_sums, converged, divergent, bound: sum })
}

/// All ordered `p`-tuples of multi-indices with componentwise sum `beta` and
/// every part of order at least 1.
pub fn enumerate_compositions(beta: &[u32], p: usize) -> Vec<Vec<Vec<u32>>> {
    fn rec(rest: &[u32], p: usize, prefix: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        let total: u32 = rest.iter().sum();
        if p == 0 {
            if total == 0 {
                out.push(prefix.clone());
            }
            return;
        }
        if (total as usize) < p {
            return;
        }
        if p == 1 {
            prefix.push(rest.to_vec());
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        // every l <= rest componentwise with |l| >= 1
        let mut l = vec![0u32; rest.len()];
        loop {
            let mut i = 0;
            while i < l.len() {
                if l[i] < rest[i] {
                    l[i] += 1;
                    break;
                }
                l[i] = 0;
                i += 1;
            }
            if i == l.len() {
                break;
            }
            let remaining: Vec<u32> = rest.iter().zip(&l).map(|(r, x)| r - x).collect();
            prefix.push(l.clone());
            rec(&remaining, p - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if p == 0 {
        return out;
    }
    rec(beta, p, &mut Vec::new(), &mut out);
    out
}

/// Choice of the constants `c_β` in the power-nonlinearity estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum CBetaPolicy {
    /// `c_β = 2^{|β|}`.
    #[default]
    BinomialMass,
    Uniform { value: f64 },
}


impl CBetaPolicy {
    pub fn c_beta(&self, order: u32) -> f64 {
        match self {
            CBetaPolicy::BinomialMass => 2f64.powi(order as i32),
            CBetaPolicy::Uniform { value } => *value,
        }
    }
}

/// `Σ_{|β|=b} c_β · #{compositions of β into p parts} · 2^{|β|}` for each
/// `(b, p)`, so the estimate sums collapse to a short loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionTable {
    j: u32,
    dim: usize,
    rows: Vec<(u32, u32, f64)>,
}

impl CompositionTable {
    pub fn new(j: u32, dim: usize, policy: CBetaPolicy) -> Result<Self> {
        require_embedding(j, dim)?;
        let mut rows = Vec::new();
        for beta in multi_indices(dim, j) {
            let order: u32 = beta.iter().sum();
            if order == 0 {
                continue;
            }
            for p in 1..=order {
                let count = enumerate_compositions(&beta, p as usize).len() as f64;
                let weight = policy.c_beta(order) * count * 2f64.powi(order as i32);
                match rows.iter_mut().find(|r: &&mut (u32, u32, f64)| r.0 == order && r.1 == p) {
                    Some(r) => r.2 += weight,
                    None => rows.push((order, p, weight)),
                }
            }
        }
        Ok(CompositionTable { j, dim, rows })
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `|(γ/2)(γ/2-1)…(γ/2-(p-1))|`.
fn half_falling(gamma: f64, p: u32) -> f64 {
    (0..p).map(|j| (gamma / 2.0 - j as f64).abs()).product()
}

/// `Γ₁(γ, η, ‖u‖)` with `|c_{l₁…l_p}|` replaced by its bound.
pub fn gamma1_with(table: &CompositionTable, gamma: f64, eta: f64, u: f64, c0: f64, c1: f64) -> f64 {
    let g = gamma.abs();
    let mut total = c0 * c1.powf(g) * (eta.powf(g) + u.powf(g)) * u;
    for &(_, p, w) in &table.rows {
        let e = (gamma - 2.0 * p as f64).abs();
        total += w
            * half_falling(gamma, p)
            * c1.powf(e)
            * (eta.powf(e) + u.powf(e))
            * u.powi(2 * p as i32 + 1);
    }
    total
}

/// `Γ₂(γ, η, ‖u‖, ‖v‖)` with `|c_{l₁…l_p}|` replaced by its bound.
pub fn gamma2_with(
    table: &CompositionTable,
    gamma: f64,
    eta: f64,
    u: f64,
    v: f64,
    c0: f64,
    c1: f64,
) -> f64 {
    let tri = |e: f64| eta.powf(e) + u.powf(e) + v.powf(e);
    let g = gamma.abs();
    let gm1 = (gamma - 1.0).abs();
    let mut total = c0 * c1.powf(gm1) * g * tri(gm1) * (u + v) + c0 * c1.powf(g) * tri(g);
    for &(_, p, w) in &table.rows {
        let p_ = p as i32;
        let e = (gamma - 2.0 * p as f64).abs();
        let e1 = (gamma - 2.0 * p as f64 - 1.0).abs();
        let first = c1.powf(e1) * e * tri(e1) * (u.powi(2 * p_ + 1) + v.powi(2 * p_ + 1));
        let second = c1.powf(e) * tri(e) * (u.powi(2 * p_) + v.powi(2 * p_));
        total += w * half_falling(gamma, p) * (first + second);
    }
    total
}

#[allow(clippy::too_many_arguments)]
pub fn gamma1(
    gamma: f64,
    eta: f64,
    norm_u: f64,
    j: u32,
    dim: usize,
    c0: f64,
    c1: f64,
    policy: CBetaPolicy,
) -> Result<f64> {
    let table = CompositionTable::new(j, dim, policy)?;
    finite(gamma1_with(&table, gamma, eta, norm_u, c0, c1), "Gamma1")
}

#[allow(clippy::too_many_arguments)]
pub fn gamma2(
    gamma: f64,
    eta: f64,
    norm_u: f64,
    norm_v: f64,
    j: u32,
    dim: usize,
    c0: f64,
    c1: f64,
    policy: CBetaPolicy,
) -> Result<f64> {
    let table = CompositionTable::new(j, dim, policy)?;
    finite(gamma2_with(&table, gamma, eta, norm_u, norm_v, c0, c1), "Gamma2")
}

/// Constants entering the estimates and windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateConstants {
    /// Constant of the window inequalities.
    pub c: f64,
    /// Constant inside `𝒢₁`, `𝒢₂`.
    pub c_lemma: f64,
    /// Constant of the power-nonlinearity estimates.
    pub c0: f64,
    pub c_beta: CBetaPolicy,
    /// `C₁(J, N)` with `‖f‖_{L^∞} <= C₁‖f‖_{H^J}`.
    pub c1_embed: f64,
    /// `c₁ >= 1` with `‖f‖_{L^∞} <= c₁‖f‖_{H^{⌊N/2⌋+1}}`.
    pub c1_power: f64,
}

impl Default for EstimateConstants {
    fn default() -> Self {
        EstimateConstants {
            c: 1.0,
            c_lemma: 1.0,
            c0: 1.0,
            c_beta: CBetaPolicy::BinomialMass,
            c1_embed: 1.0,
            c1_power: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowFamily {
    Cj,
    Series,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellPosednessWindow {
    pub t: f64,
    pub r: f64,
    pub eta: f64,
    /// Map into the ball, contraction, infimum floor.
    pub conditions: [bool; 3],
    /// Largest `T` allowed by each inequality on its own.
    pub bounds: [f64; 3],
    /// `𝒢₁(2η,R)` or `Σ|a_k|Γ₁(γ_k,2η,R)`.
    pub first_estimate: f64,
    /// `𝒢₂(2η,R,R)` or `Σ|a_k|Γ₂(γ_k,2η,R,R)`.
    pub second_estimate: f64,
    pub family: WindowFamily,
}

/// Shrink applied to the closed-form minimum so that every inequality holds
/// after rounding.
const WINDOW_SHRINK: f64 = 1.0 - 1e-12;

fn check_inputs(u0_norm: f64, eta: f64) -> Result<()> {
    if !(u0_norm > 0.0) {
        return Err(FnlsError::ZeroNorm("initial data"));
    }
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(FnlsError::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    Ok(())
}

/// Window for a `C^J` nonlinearity with `R = 2‖u₀‖`.
pub fn existence_window_cj(
    spec: &NonlinearitySpec,
    u0_norm: f64,
    eta: f64,
    j: u32,
    dim: usize,
    consts: &EstimateConstants,
) -> Result<WellPosednessWindow> {
    check_inputs(u0_norm, eta)?;
    let r = 2.0 * u0_norm;
    let c = consts.c;
    let e1 = g1(spec, 2.0 * eta, r, j, dim, consts.c_lemma, consts.c1_embed)?;
    let e2 = g2(spec, 2.0 * eta, r, r, j, dim, consts.c_lemma, consts.c1_embed)?;
    let bounds = [
        r / (2.0 * c * e1 * r),
        1.0 / (2.0 * c * e2),
        (1.0 / eta) / (2.0 * (c * r / 2.0 + c * e1 * r)),
    ];
    let t = bounds.iter().copied().fold(f64::INFINITY, f64::min) * WINDOW_SHRINK;
    let conditions = [
        c * t * e1 * r <= r / 2.0,
        c * t * e2 <= 0.5,
        c * t * r / 2.0 + c * t * e1 * r <= 0.5 / eta,
    ];
    emit(t, r, eta, conditions, bounds, e1, e2, WindowFamily::Cj)
}

#[allow(clippy::too_many_arguments)]
fn emit(
    t: f64,
    r: f64,
    eta: f64,
    conditions: [bool; 3],
    bounds: [f64; 3],
    e1: f64,
    e2: f64,
    family: WindowFamily,
) -> Result<WellPosednessWindow> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(FnlsError::NonFinite("window length"));
    }
    if !conditions.iter().all(|&b| b) {
        return Err(FnlsError::NonFinite("window conditions"));
    }
    Ok(WellPosednessWindow {
        t,
        r,
        eta,
        conditions,
        bounds,
        first_estimate: e1,
        second_estimate: e2,
        family,
    })
}

/// `(Σ|a_k|Γ₁(γ_k,η,R), Σ|a_k|Γ₂(γ_k,η,R,R))`.
pub fn series_gamma_sums(
    series: &SeriesNonlinearity,
    eta: f64,
    r: f64,
    j: u32,
    dim: usize,
    consts: &EstimateConstants,
) -> Result<(f64, f64)> {
    let table = CompositionTable::new(j, dim, consts.c_beta)?;
    let (mut s1, mut s2) = (0.0, 0.0);
    for t in series.terms() {
        let a = t.coeff.norm();
        if a == 0.0 {
            continue;
        }
        s1 += a * gamma1_with(&table, t.exponent, eta, r, consts.c0, consts.c1_power);
        s2 += a * gamma2_with(&table, t.exponent, eta, r, r, consts.c0, consts.c1_power);
    }
    Ok((finite(s1, "Gamma1 sum")?, finite(s2, "Gamma2 sum")?))
}

/// Window for a series nonlinearity with `R = 2‖u₀‖`. The infimum bound is
/// `T(cR/2 + cΣ|a_k|Γ₁) <= η⁻¹/2`.
pub fn existence_window_series(
    series: &SeriesNonlinearity,
    u0_norm: f64,
    eta: f64,
    j: u32,
    dim: usize,
    consts: &EstimateConstants,
) -> Result<WellPosednessWindow> {
    check_inputs(u0_norm, eta)?;
    let r = 2.0 * u0_norm;
    let report = series_condition(series, (2.0 * eta).max(r), j)?;
    if report.divergent || !report.bound.is_finite() {
        return Err(FnlsError::SeriesDivergence { run: DIVERGENCE_RUN });
    }
    let (s1, s2) = series_gamma_sums(series, 2.0 * eta, r, j, dim, consts)?;
    let c = consts.c;
    let bounds = [
        if s1 > 0.0 { r / (2.0 * s1) } else { f64::INFINITY },
        if s2 > 0.0 { 1.0 / (2.0 * s2) } else { f64::INFINITY },
        (1.0 / eta) / (2.0 * (c * r / 2.0 + c * s1)),
    ];
    let t = bounds.iter().copied().fold(f64::INFINITY, f64::min) * WINDOW_SHRINK;
    let conditions = [t * s1 <= r / 2.0, t * s2 <= 0.5, t * (c * r / 2.0 + c * s1) <= 0.5 / eta];
    emit(t, r, eta, conditions, bounds, s1, s2, WindowFamily::Series)
}

/// Dispatch on the nonlinearity family.
pub fn existence_window(
    spec: &NonlinearitySpec,
    u0_norm: f64,
    eta: f64,
    j: u32,
    dim: usize,
    consts: &EstimateConstants,
) -> Result<WellPosednessWindow> {
    match spec {
        NonlinearitySpec::Cj(_) => existence_window_cj(spec, u0_norm, eta, j, dim, consts),
        NonlinearitySpec::Series(s) => existence_window_series(s, u0_norm, eta, j, dim, consts),
    }
}

/// `η` and `‖u‖_{H^J}` for a sample, failing when the certified infimum
/// vanishes.
pub fn sample_eta_norm(u: &SpectralField, j: u32) -> Result<(f64, f64)> {
    let inf = certified_infimum(u, DEFAULT_CERTIFY_OVERSAMPLE)?;
    if inf <= 0.0 {
        return Err(FnlsError::NonVanishing { certified_inf: inf });
    }
    Ok((1.0 / inf, sobolev_norm_spectral(u, j as f64)))
}

/// Ratio `‖𝒩(|u|)u‖ / ((𝒢₁/c)·‖u‖)` for one sample; the smallest `c` that
/// makes the norm bound hold on it.
pub fn lemma_ratio(
    spec: &NonlinearitySpec,
    u: &SpectralField,
    j: u32,
    c1_embed: f64,
) -> Result<f64> {
    let (eta, norm) = sample_eta_norm(u, j)?;
    if norm == 0.0 {
        return Err(FnlsError::ZeroNorm("sample"));
    }
    let lhs = sobolev_norm_spectral(&apply_nonlinear_term(spec, u, FIT_OVERSAMPLE)?, j as f64);
    let g = g1(spec, eta, norm, j, u.grid().dim(), 1.0, c1_embed)?;
    finite(lhs / (g * norm), "fit ratio")
}

/// Smallest `c` validating the `𝒢₁` norm bound on every sample.
pub fn fit_empirical_constant(
    spec: &NonlinearitySpec,
    samples: &[SpectralField],
    j: u32,
    c1_embed: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(FnlsError::EmptySamples);
    }
    let mut c = 0.0f64;
    for u in samples {
        c = c.max(lemma_ratio(spec, u, j, c1_embed)?);
    }
    Ok(c.max(f64::MIN_POSITIVE))
}

/// `|u|^γ u` as a spec.
fn power_spec(gamma: f64) -> NonlinearitySpec {
    NonlinearitySpec::power(gamma)
}

/// Smallest `c₀` such that `Γ₁` bounds `‖|u|^γu‖` on one sample; `Γ₁` is
/// affine in `c₀`, so this is `(lhs - Γ₁|_{c₀=0}) / ∂Γ₁/∂c₀`.
pub fn gamma1_c0_requirement(
    table: &CompositionTable,
    gamma: f64,
    u: &SpectralField,
    c1_power: f64,
) -> Result<f64> {
    let (eta, norm) = sample_eta_norm(u, table.j())?;
    let lhs = sobolev_norm_spectral(
        &apply_nonlinear_term(&power_spec(gamma), u, FIT_OVERSAMPLE)?,
        table.j() as f64,
    );
    let rest = gamma1_with(table, gamma, eta, norm, 0.0, c1_power);
    let slope = gamma1_with(table, gamma, eta, norm, 1.0, c1_power) - rest;
    finite((lhs - rest) / slope, "c0 requirement")
}

/// Smallest `c₀` such that `Γ₂` bounds the difference on one pair; the pair
/// shares `η = max(η_u, η_v)`.
pub fn gamma2_c0_requirement(
    table: &CompositionTable,
    gamma: f64,
    u: &SpectralField,
    v: &SpectralField,
    c1_power: f64,
) -> Result<f64> {
    let j = table.j();
    let (eta_u, nu) = sample_eta_norm(u, j)?;
    let (eta_v, nv) = sample_eta_norm(v, j)?;
    let eta = eta_u.max(eta_v);
    let diff = sobolev_norm_spectral(&(u - v), j as f64);
    if diff == 0.0 {
        return Err(FnlsError::IdenticalData);
    }
    let spec = power_spec(gamma);
    let lhs = sobolev_norm_spectral(
        &(&apply_nonlinear_term(&spec, u, FIT_OVERSAMPLE)?
            - &apply_nonlinear_term(&spec, v, FIT_OVERSAMPLE)?),
        j as f64,
    ) / diff;
    let rest = gamma2_with(table, gamma, eta, nu, nv, 0.0, c1_power);
    let slope = gamma2_with(table, gamma, eta, nu, nv, 1.0, c1_power) - rest;
    finite((lhs - rest) / slope, "c0 requirement")
}

/// Fitted `c₀` for the `Γ₂` difference bound over training pairs, kept
/// strictly positive.
pub fn fit_gamma2_c0(
    table: &CompositionTable,
    gamma: f64,
    pairs: &[(SpectralField, SpectralField)],
    c1_power: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(FnlsError::EmptySamples);
    }
    let mut c0 = f64::MIN_POSITIVE;
    for (u, v) in pairs {
        c0 = c0.max(gamma2_c0_requirement(table, gamma, u, v, c1_power)?);
    }
    Ok(c0)
}

/// Fitted `c₀` for the `Γ₁` norm bound over training fields.
pub fn fit_gamma1_c0(
    table: &CompositionTable,
    gamma: f64,
    samples: &[SpectralField],
    c1_power: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(FnlsError::EmptySamples);
    }
    let mut c0 = f64::MIN_POSITIVE;
    for u in samples {
        c0 = c0.max(gamma1_c0_requirement(table, gamma, u, c1_power)?);
    }
    Ok(c0)
}

/// Summary of the estimate functions at one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub sn: f64,
    pub k_constant: Option<f64>,
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub c_fit: Option<f64>,
    pub eta: f64,
    pub norm_u: f64,
    pub norm_v: Option<f64>,
    pub j: u32,
    pub dim: usize,
    pub nonlinearity: String,
}

impl EstimateReport {
    /// Evaluate everything that applies to `spec` at `(η, ‖u‖, ‖v‖)`. For
    /// series the `Γ` values are the coefficient-weighted sums.
    #[allow(clippy::too_many_arguments)]
    pub fn compute(
        spec: &NonlinearitySpec,
        eta: f64,
        norm_u: f64,
        norm_v: Option<f64>,
        j: u32,
        dim: usize,
        consts: &EstimateConstants,
    ) -> Result<Self> {
        let sn = sn_term(spec, eta, consts.c1_embed, norm_u)?;
        let mut report = EstimateReport {
            sn,
            k_constant: None,
            g1: None,
            g2: None,
            gamma1: None,
            gamma2: None,
            c_fit: None,
            eta,
            norm_u,
            norm_v,
            j,
            dim,
            nonlinearity: spec.label().to_string(),
        };
        match spec {
            NonlinearitySpec::Cj(c) => {
                report.k_constant = Some(k_constant(j, c.gamma()));
                report.g1 = Some(g1(spec, eta, norm_u, j, dim, consts.c_lemma, consts.c1_embed)?);
                if let Some(v) = norm_v {
                    report.g2 =
                        Some(g2(spec, eta, norm_u, v, j, dim, consts.c_lemma, consts.c1_embed)?);
                }
            }
            NonlinearitySpec::Series(s) => {
                let table = CompositionTable::new(j, dim, consts.c_beta)?;
                let v = norm_v.unwrap_or(norm_u);
                let (mut s1, mut s2) = (0.0, 0.0);
                for t in s.terms() {
                    let a = t.coeff.norm();
                    s1 += a * gamma1_with(&table, t.exponent, eta, norm_u, consts.c0, consts.c1_power);
                    s2 += a
                        * gamma2_with(&table, t.exponent, eta, norm_u, v, consts.c0, consts.c1_power);
                }
                report.gamma1 = Some(finite(s1, "Gamma1 sum")?);
                report.gamma2 = Some(finite(s2, "Gamma2 sum")?);
            }
        }
        Ok(report)
    }
}
