//! `simulate`: integrate a configuration and write its run directory.
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/config.toml
//! <dir>/snapshots/state_000000.fnls ...
//! <dir>/timeline.csv | timeline.jsonl
//! <dir>/norms.csv
//! <dir>/reports/summary.json
//! <dir>/reports/picard.jsonl
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use fnls_core::config::{DiagnosticsFormat, InitialData, RunConfig};
use fnls_core::diagnostics::{relative_drift, timeline};
use fnls_core::estimates::{existence_window, sample_eta_norm};
use fnls_core::norms::{sobolev_norm_spectral, NormReport};
use fnls_core::solver::{integrate, PicardReport, StopReason, Trajectory};
use fnls_core::{Complex64, FnlsError, MembershipFailure, Result, SpectralField};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NON_VANISHING: i32 = 2;
pub const EXIT_PICARD: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code_for_error(e: &FnlsError) -> i32 {
    match e {
        FnlsError::NonVanishing { .. }
        | FnlsError::Domain { .. }
        | FnlsError::Membership(MembershipFailure::InfimumFloor { .. }) => EXIT_NON_VANISHING,
        FnlsError::PicardNonConvergence { .. }
        | FnlsError::Membership(MembershipFailure::NormBall { .. }) => EXIT_PICARD,
        FnlsError::Io(_) | FnlsError::Snapshot(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

pub fn exit_code_for_stop(stop: &StopReason) -> i32 {
    match stop {
        StopReason::Completed | StopReason::WindowBudget { .. } => EXIT_OK,
        StopReason::NonVanishing { .. }
        | StopReason::Membership { failure: MembershipFailure::InfimumFloor { .. } } => {
            EXIT_NON_VANISHING
        }
        StopReason::PicardNonConvergence { .. }
        | StopReason::Membership { failure: MembershipFailure::NormBall { .. } } => EXIT_PICARD,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Command-line overrides of the `[outputs]` section.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulateOptions {
    pub snapshot_every: Option<usize>,
    pub diagnostics: Option<DiagnosticsFormat>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub nonlinearity: String,
    pub s: f64,
    pub j: u32,
    pub dim: usize,
    pub points: usize,
    pub total_time: f64,
    pub final_time: f64,
    pub windows: usize,
    pub picard_iterations: usize,
    pub max_picard_ratio: Option<f64>,
    pub stop: StopReason,
    pub exit_code: i32,
    pub mass_drift: f64,
    pub energy_drift: f64,
    /// False for nonlinearities with complex values, whose energy is not
    /// expected to be conserved.
    pub energy_conserved_expected: bool,
    pub min_eta_times_inf: Option<f64>,
    /// Certified existence time at the initial data with the configured
    /// constants.
    pub certified_t: Option<f64>,
    /// `H^J` distance to the closed-form solution for constant and
    /// plane-wave data.
    pub exact_error: Option<f64>,
}

/// `A e^{i(k·x + (𝒩(|A|) - |k|^s)t)}`; constants are the `k = 0` case.
pub fn closed_form(cfg: &RunConfig, t: f64) -> Result<Option<SpectralField>> {
    let grid = cfg.grid()?;
    let spec = cfg.spec();
    let (amp, k) = match &cfg.initial_data.data {
        InitialData::Constant { value } => (*value, vec![0; grid.dim()]),
        InitialData::PlaneWave { amplitude, k } => (*amplitude, k.clone()),
        _ => return Ok(None),
    };
    if amp.norm() == 0.0 {
        return Ok(None);
    }
    let k2: f64 = k.iter().map(|&x| (x * x) as f64).sum();
    let omega = spec.value(amp.norm()) - Complex64::new(k2.powf(cfg.equation.s / 2.0), 0.0);
    let phase = (Complex64::new(0.0, 1.0) * omega * t).exp();
    Ok(Some(SpectralField::plane_wave(grid, amp * phase, &k)?))
}

pub fn certified_t_at(cfg: &RunConfig, u0: &SpectralField) -> Option<f64> {
    let solver = cfg.solver_config();
    let consts = solver.constants.resolve(u0.grid(), solver.j).ok()?;
    let (eta, norm) = sample_eta_norm(u0, solver.j).ok()?;
    existence_window(&cfg.spec(), norm, eta, solver.j, u0.grid().dim(), &consts)
        .ok()
        .map(|w| w.t)
}

fn write(dir: &Path, rel: &str, bytes: &[u8], hashes: &mut BTreeMap<String, String>) -> Result<()> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, bytes)?;
    hashes.insert(rel.to_string(), sha256_hex(bytes));
    Ok(())
}

fn snapshot_indices(n: usize, every: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = if every == 0 {
        vec![0]
    } else {
        (0..n).step_by(every).collect()
    };
    if idx.last() != Some(&(n - 1)) {
        idx.push(n - 1);
    }
    idx
}

/// Integrate `cfg` and write the run directory. Solver failures after the
/// first window are part of the summary (see `exit_code`); errors before any
/// work are returned.
pub fn simulate(cfg: &RunConfig, out_dir: &Path, opts: SimulateOptions) -> Result<RunSummary> {
    let mut cfg = cfg.clone();
    if let Some(k) = opts.snapshot_every {
        cfg.outputs.snapshot_every = k;
    }
    if let Some(d) = opts.diagnostics {
        cfg.outputs.diagnostics = d;
    }
    let v = cfg.violations();
    if !v.is_empty() {
        return Err(FnlsError::Config(v.join("\n")));
    }
    let spec = cfg.spec();
    let solver = cfg.solver_config();
    let u0 = cfg.initial_field()?;
    let (traj, reports) = integrate(&u0, &spec, &solver, cfg.solver.total_time)?;

    fs::create_dir_all(out_dir)?;
    let mut hashes = BTreeMap::new();
    let config_text = cfg.to_toml();
    write(out_dir, "config.toml", config_text.as_bytes(), &mut hashes)?;

    for i in snapshot_indices(traj.fields.len(), cfg.outputs.snapshot_every) {
        let mut buf = Vec::new();
        fnls_core::snapshot::write_snapshot(&mut buf, &traj.fields[i], solver.s, traj.times[i])?;
        write(out_dir, &format!("snapshots/state_{i:06}.fnls"), &buf, &mut hashes)?;
    }

    let records = timeline(&traj, &spec, solver.s, solver.j, solver.certify_oversample)?;
    let (name, body) = match cfg.outputs.diagnostics {
        DiagnosticsFormat::Csv => {
            let mut s = String::from(fnls_core::diagnostics::ConservationRecord::CSV_HEADER);
            s.push('\n');
            for r in &records {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            ("timeline.csv", s)
        }
        DiagnosticsFormat::Jsonl => {
            ("timeline.jsonl", records.iter().map(|r| r.json_line() + "\n").collect())
        }
    };
    write(out_dir, name, body.as_bytes(), &mut hashes)?;
    write(out_dir, "norms.csv", norms_csv(&traj).as_bytes(), &mut hashes)?;
    let picard: String = reports
        .iter()
        .map(|r| serde_json::to_string(r).expect("report serializes") + "\n")
        .collect();
    write(out_dir, "reports/picard.jsonl", picard.as_bytes(), &mut hashes)?;

    let exact_error = closed_form(&cfg, traj.final_time())?
        .map(|e| sobolev_norm_spectral(&(traj.final_state() - &e), solver.j as f64));
    let summary = RunSummary {
        nonlinearity: spec.label().to_string(),
        s: solver.s,
        j: solver.j,
        dim: cfg.equation.dim,
        points: cfg.equation.points,
        total_time: cfg.solver.total_time,
        final_time: traj.final_time(),
        windows: reports.len(),
        picard_iterations: reports.iter().map(|r| r.iterations).sum(),
        max_picard_ratio: max_ratio(&reports),
        exit_code: exit_code_for_stop(&traj.stop),
        stop: traj.stop.clone(),
        mass_drift: relative_drift(records.iter().map(|r| r.mass)),
        energy_drift: relative_drift(records.iter().map(|r| r.energy)),
        energy_conserved_expected: spec.is_real_valued(),
        min_eta_times_inf: records
            .iter()
            .map(|r| r.eta_times_inf)
            .filter(|x| !x.is_nan())
            .reduce(f64::min),
        certified_t: certified_t_at(&cfg, &u0),
        exact_error,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write(out_dir, "reports/summary.json", json.as_bytes(), &mut hashes)?;

    let manifest = serde_json::json!({
        "tool": "fnls",
        "version": env!("CARGO_PKG_VERSION"),
        "config_sha256": sha256_hex(config_text.as_bytes()),
        "seed": cfg.constants.seed,
        "artifacts": hashes,
    });
    fs::write(
        out_dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n",
    )?;
    Ok(summary)
}

fn max_ratio(reports: &[PicardReport]) -> Option<f64> {
    reports.iter().filter_map(|r| r.max_ratio()).reduce(f64::max)
}

fn norms_csv(traj: &Trajectory) -> String {
    let mut s = String::from(NormReport::CSV_HEADER);
    s.push('\n');
    for (t, n) in traj.times.iter().zip(&traj.norms) {
        s.push_str(&n.csv_row(*t));
        s.push('\n');
    }
    s
}
