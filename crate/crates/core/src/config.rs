//! Run configuration in TOML.
//!
//! ```toml
//! [equation]
//! s = 1.0
//! dim = 1
//! points = 32
//!
//! [nonlinearity]
//! kind = "power"
//! gamma = 2.0
//!
//! [initial_data]
//! kind = "constant"
//! value = [2.0, 0.0]
//!
//! [solver]
//! j = 2
//! total_time = 0.1
//! ```
//!
//! Parsing reports every constraint violation at once.

use std::path::PathBuf;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FnlsError, Result};
use crate::estimates::CBetaPolicy;
use crate::initial::perturbed_constant_with_floor;
use crate::nonlinearity::{Builtin, NonlinearitySpec, Truncation};
use crate::norms::certified_infimum;
use crate::snapshot::load_snapshot;
use crate::solver::{QuadratureRule, SolverConfig, WindowConstants};
use crate::spectral::{SpectralField, TorusGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub equation: Equation,
    pub nonlinearity: NonlinearitySection,
    pub initial_data: InitialDataSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub constants: Constants,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Equation {
    pub s: f64,
    #[serde(default = "one")]
    pub dim: usize,
    pub points: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearitySection {
    #[serde(flatten)]
    pub builtin: Builtin,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_terms: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
}

impl NonlinearitySection {
    pub fn truncation(&self) -> Truncation {
        let d = Truncation::default();
        Truncation {
            max_terms: self.max_terms.unwrap_or(d.max_terms),
            tail_tol: self.tail_tol.unwrap_or(d.tail_tol),
        }
    }

    pub fn spec(&self) -> NonlinearitySpec {
        self.builtin.build(self.truncation())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Constant {
        value: Complex64,
    },
    /// `A e^{ik·x}`.
    PlaneWave {
        amplitude: Complex64,
        k: Vec<i64>,
    },
    /// `c₀ + Σ_{0<|k|_∞<=modes} ε_k e^{ik·x}` with `|ε_k| <= eps`, shrunk
    /// until the certified infimum is at least `|c₀|(1-rho)`.
    PerturbedConstant {
        c0: Complex64,
        eps: f64,
        #[serde(default = "default_modes")]
        modes: i64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
    FromSnapshot {
        path: PathBuf,
    },
}

fn default_modes() -> i64 {
    3
}

fn default_rho() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSection {
    #[serde(flatten)]
    pub data: InitialData,
    /// Skip the non-vanishing requirement for singular nonlinearities.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_vanishing: bool,
}

/// Solver settings; `s` and the constants live in their own sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub j: u32,
    pub total_time: f64,
    pub use_certified_t: bool,
    pub max_window: f64,
    pub quad_nodes: usize,
    pub quadrature: QuadratureRule,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    pub oversample_factor: usize,
    pub certify_oversample: usize,
    pub max_windows: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection {
            j: d.j,
            total_time: 0.1,
            use_certified_t: d.use_certified_t,
            max_window: d.max_window,
            quad_nodes: d.quad_nodes,
            quadrature: d.quadrature,
            picard_tol: d.picard_tol,
            picard_max_iters: d.picard_max_iters,
            oversample_factor: d.oversample_factor,
            certify_oversample: d.certify_oversample,
            max_windows: d.max_windows,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticsFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Outputs {
    /// Write a snapshot every this many stored states; 0 writes only the
    /// first and last.
    pub snapshot_every: usize,
    pub diagnostics: DiagnosticsFormat,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { snapshot_every: 0, diagnostics: DiagnosticsFormat::Csv }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C1Mode {
    /// Embedding constants computed from the grid.
    #[default]
    Computed,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CBetaKind {
    #[default]
    BinomialMass,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Constants {
    pub c: f64,
    pub c_lemma: f64,
    pub c0: f64,
    pub c1_mode: C1Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    pub c_beta_policy: CBetaKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_beta: Option<f64>,
    /// Seed for randomized initial data and constant fitting.
    pub seed: u64,
}

impl Default for Constants {
    fn default() -> Self {
        let d = WindowConstants::default();
        Constants {
            c: d.c,
            c_lemma: d.c_lemma,
            c0: d.c0,
            c1_mode: C1Mode::Computed,
            c1: None,
            c_beta_policy: CBetaKind::BinomialMass,
            c_beta: None,
            seed: 0,
        }
    }
}

impl Constants {
    pub fn window_constants(&self) -> WindowConstants {
        WindowConstants {
            c: self.c,
            c_lemma: self.c_lemma,
            c0: self.c0,
            c_beta: match self.c_beta_policy {
                CBetaKind::BinomialMass => CBetaPolicy::BinomialMass,
                CBetaKind::Uniform => CBetaPolicy::Uniform { value: self.c_beta.unwrap_or(1.0) },
            },
            c1: match self.c1_mode {
                C1Mode::Computed => None,
                C1Mode::Fixed => self.c1,
            },
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, x) in [("c", self.c), ("c_lemma", self.c_lemma), ("c0", self.c0)] {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("constants.{name} must be positive, got {x}"));
            }
        }
        match (self.c1_mode, self.c1) {
            (C1Mode::Fixed, None) => v.push("c1_mode = \"fixed\" needs constants.c1".into()),
            (C1Mode::Fixed, Some(x)) if !(x > 0.0 && x.is_finite()) => {
                v.push(format!("constants.c1 must be positive, got {x}"))
            }
            _ => {}
        }
        match (self.c_beta_policy, self.c_beta) {
            (CBetaKind::Uniform, None) => {
                v.push("c_beta_policy = \"uniform\" needs constants.c_beta".into())
            }
            (CBetaKind::Uniform, Some(x)) if !(x > 0.0 && x.is_finite()) => {
                v.push(format!("constants.c_beta must be positive, got {x}"))
            }
            _ => {}
        }
        v
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.equation.dim, self.equation.points)
    }

    pub fn spec(&self) -> NonlinearitySpec {
        self.nonlinearity.spec()
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            s: self.equation.s,
            j: s.j,
            use_certified_t: s.use_certified_t,
            max_window: s.max_window,
            quad_nodes: s.quad_nodes,
            quadrature: s.quadrature,
            picard_tol: s.picard_tol,
            picard_max_iters: s.picard_max_iters,
            oversample_factor: s.oversample_factor,
            certify_oversample: s.certify_oversample,
            max_windows: s.max_windows,
            constants: self.constants.window_constants(),
        }
    }

    /// Build the initial field; snapshots must match the configured grid.
    pub fn initial_field(&self) -> Result<SpectralField> {
        let grid = self.grid()?;
        match &self.initial_data.data {
            InitialData::Constant { value } => Ok(SpectralField::constant(grid, *value)),
            InitialData::PlaneWave { amplitude, k } => SpectralField::plane_wave(grid, *amplitude, k),
            InitialData::PerturbedConstant { c0, eps, modes, rho } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.constants.seed);
                perturbed_constant_with_floor(grid, *c0, *eps, *modes, *rho, &mut rng)
            }
            InitialData::FromSnapshot { path } => {
                let snap = load_snapshot(path)?;
                if *snap.field.grid() != grid {
                    return Err(FnlsError::GridMismatch(format!(
                        "snapshot {} has {} points in {} dimension(s), config asks for {} in {}",
                        path.display(),
                        snap.field.grid().points(),
                        snap.field.grid().dim(),
                        grid.points(),
                        grid.dim()
                    )));
                }
                Ok(snap.field)
            }
        }
    }

    /// Every constraint violation; empty for a usable configuration.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let eq = &self.equation;
        if let Err(e) = self.grid() {
            v.push(e.to_string());
        }
        v.extend(self.solver_config().violations(eq.dim));
        if !self.solver.total_time.is_finite() {
            v.push(format!("total_time must be finite, got {}", self.solver.total_time));
        }
        v.extend(self.constants.violations());
        v.extend(self.nonlinearity_violations());
        v.extend(self.initial_data_violations());
        v
    }

    fn nonlinearity_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let finite = |x: f64| x.is_finite();
        match &self.nonlinearity.builtin {
            Builtin::Power { gamma } | Builtin::Log1p { gamma } if !finite(*gamma) => {
                v.push(format!("gamma must be finite, got {gamma}"))
            }
            Builtin::InversePower { nu } if !(*nu > 0.0 && nu.is_finite()) => {
                v.push(format!("inverse_power needs nu > 0, got {nu}"))
            }
            Builtin::Exp { r } if !finite(*r) => v.push(format!("r must be finite, got {r}")),
            Builtin::SinQuotient { r1, r2 } if !(finite(*r1) && *r2 != 0.0 && finite(*r2)) => {
                v.push(format!("sin_quotient needs finite r1 and nonzero finite r2, got {r1}, {r2}"))
            }
            Builtin::Combined { terms } if terms.iter().any(|(a, nu)| !(finite(a.re) && finite(a.im) && finite(*nu))) => {
                v.push("combined terms must be finite".into())
            }
            _ => {}
        }
        if let Some(m) = self.nonlinearity.max_terms {
            if m == 0 {
                v.push("max_terms must be positive".into());
            }
        }
        if let Some(t) = self.nonlinearity.tail_tol {
            if !(t > 0.0) {
                v.push(format!("tail_tol must be positive, got {t}"));
            }
        }
        v
    }

    fn initial_data_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        match &self.initial_data.data {
            InitialData::PerturbedConstant { eps, modes, rho, .. } => {
                if !(*eps >= 0.0 && eps.is_finite()) {
                    v.push(format!("eps must be nonnegative, got {eps}"));
                }
                if *modes < 1 {
                    v.push(format!("modes must be at least 1, got {modes}"));
                }
                if !(0.0..1.0).contains(rho) {
                    v.push(format!("rho must lie in [0, 1), got {rho}"));
                }
            }
            InitialData::PlaneWave { k, .. } if k.len() != self.equation.dim => {
                v.push(format!("plane_wave k has {} entries, dim is {}", k.len(), self.equation.dim))
            }
            // checked when the run starts
            InitialData::FromSnapshot { .. } => return v,
            _ => {}
        }
        if !v.is_empty() || self.grid().is_err() {
            return v;
        }
        if self.spec().is_singular() && !self.initial_data.allow_vanishing {
            let vanishes = match self.initial_data.data {
                InitialData::Constant { value } => value == Complex64::new(0.0, 0.0),
                InitialData::PlaneWave { amplitude, .. } => amplitude == Complex64::new(0.0, 0.0),
                InitialData::PerturbedConstant { c0, .. } => c0 == Complex64::new(0.0, 0.0),
                InitialData::FromSnapshot { .. } => false,
            };
            if vanishes {
                v.push(format!(
                    "non-vanishing required: nonlinearity `{}` is singular at 0 and the initial data vanishes",
                    self.spec().label()
                ));
                return v;
            }
        }
        match self.initial_field() {
            Err(e) => v.push(format!("initial data: {e}")),
            Ok(f) if self.spec().is_singular() && !self.initial_data.allow_vanishing => {
                match certified_infimum(&f, self.solver.certify_oversample.max(2)) {
                    Ok(inf) if inf > 0.0 => {}
                    _ => v.push("non-vanishing required: certified infimum of the initial data is 0".into()),
                }
            }
            Ok(_) => {}
        }
        v
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parse and validate a configuration. Syntax and type errors carry the
/// line number; constraint violations are all listed, one per line.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|r| text[..r.start.min(text.len())].matches('\n').count() + 1);
        let msg = e.message().trim().to_string();
        FnlsError::Config(match line {
            Some(l) => format!("line {l}: {msg}"),
            None => msg,
        })
    })?;
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(FnlsError::Config(v.join("\n")))
    }
}
