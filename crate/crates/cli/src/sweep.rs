#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Parameter sweeps: the Cartesian product of the axes applied to a base
//! configuration, one run directory each, plus `summary.csv`.
//!
//! ```toml
//! max_parallel = 4
//! max_runs = 64
//!
//! [axes]
//! s = [0.5, 1.0, 2.0]
//! gamma = [1.0, 2.0]
//! ```

use std::fs;
use std::path::Path;

use fnls_core::config::{InitialData, RunConfig};
use fnls_core::{Builtin, Complex64, FnlsError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::runner::{exit_code_for_error, simulate, SimulateOptions};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FNLS_THREADS";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Axes {
    pub s: Vec<f64>,
    /// `gamma` of power and log1p, `nu` of inverse_power.
    pub gamma: Vec<f64>,
    /// Sets the modulus of the initial data to `1/eta`.
    pub eta: Vec<f64>,
    pub points: Vec<usize>,
    /// Sets the modulus of the initial data.
    pub amplitude: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub axes: Axes,
    pub max_parallel: usize,
    pub max_runs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { axes: Axes::default(), max_parallel: 4, max_runs: 256 }
    }
}

/// One point of the product; `None` keeps the base value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SweepPoint {
    pub s: Option<f64>,
    pub gamma: Option<f64>,
    pub eta: Option<f64>,
    pub points: Option<usize>,
    pub amplitude: Option<f64>,
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec> {
    let spec: SweepSpec = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|r| text[..r.start.min(text.len())].matches('\n').count() + 1);
        FnlsError::Config(match line {
            Some(l) => format!("sweep line {l}: {}", e.message().trim()),
            None => format!("sweep: {}", e.message().trim()),
        })
    })?;
    let mut v = Vec::new();
    if spec.max_parallel == 0 {
        v.push("max_parallel must be positive".to_string());
    }
    if !spec.axes.eta.is_empty() && !spec.axes.amplitude.is_empty() {
        v.push("axes eta and amplitude both set the data modulus; use one".to_string());
    }
    let n = product_size(&spec.axes);
    if n > spec.max_runs {
        v.push(format!("sweep has {n} runs, more than max_runs = {}", spec.max_runs));
    }
    if v.is_empty() {
        Ok(spec)
    } else {
        Err(FnlsError::Config(v.join("\n")))
    }
}

fn product_size(a: &Axes) -> usize {
    [a.s.len(), a.gamma.len(), a.eta.len(), a.points.len(), a.amplitude.len()]
        .iter()
        .map(|&n| n.max(1))
        .product()
}

fn opt<T: Copy>(v: &[T]) -> Vec<Option<T>> {
    if v.is_empty() {
        vec![None]
    } else {
        v.iter().copied().map(Some).collect()
    }
}

/// Product in axis order `s, gamma, eta, points, amplitude`, last axis
/// fastest. Empty axes give the single base run.
pub fn sweep_points(axes: &Axes) -> Vec<SweepPoint> {
    let mut out = Vec::new();
    for s in opt(&axes.s) {
        for gamma in opt(&axes.gamma) {
            for eta in opt(&axes.eta) {
                for points in opt(&axes.points) {
                    for amplitude in opt(&axes.amplitude) {
                        out.push(SweepPoint { s, gamma, eta, points, amplitude });
                    }
                }
            }
        }
    }
    out
}

fn set_modulus(data: &mut InitialData, m: f64) -> Result<()> {
    let rescale = |z: &mut Complex64| {
        *z = if z.norm() > 0.0 { *z * (m / z.norm()) } else { Complex64::new(m, 0.0) };
    };
    match data {
        InitialData::Constant { value } => rescale(value),
        InitialData::PlaneWave { amplitude, .. } => rescale(amplitude),
        InitialData::PerturbedConstant { c0, .. } => rescale(c0),
        InitialData::FromSnapshot { .. } => {
            return Err(FnlsError::Config("cannot rescale snapshot initial data".into()))
        }
    }
    Ok(())
}

/// Base configuration with the point applied.
pub fn apply_point(base: &RunConfig, p: &SweepPoint) -> Result<RunConfig> {
    let mut cfg = base.clone();
    if let Some(s) = p.s {
        cfg.equation.s = s;
    }
    if let Some(m) = p.points {
        cfg.equation.points = m;
    }
    if let Some(g) = p.gamma {
        match &mut cfg.nonlinearity.builtin {
            Builtin::Power { gamma } | Builtin::Log1p { gamma } => *gamma = g,
            Builtin::InversePower { nu } => *nu = g,
            _ => {
                return Err(FnlsError::Config(format!(
                    "gamma axis does not apply to `{}`",
                    base.spec().label()
                )))
            }
        }
    }
    if let Some(eta) = p.eta {
        if !(eta > 0.0) {
            return Err(FnlsError::Config(format!("eta must be positive, got {eta}")));
        }
        set_modulus(&mut cfg.initial_data.data, 1.0 / eta)?;
    }
    if let Some(a) = p.amplitude {
        set_modulus(&mut cfg.initial_data.data, a)?;
    }
    let v = cfg.violations();
    if v.is_empty() {
        Ok(cfg)
    } else {
        Err(FnlsError::Config(v.join("; ")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub run: usize,
    pub point: SweepPoint,
    pub certified_t: Option<f64>,
    pub mass_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    pub final_time: Option<f64>,
    pub stop: String,
    pub exit_code: i32,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "run,s,gamma,eta,points,amplitude,certified_t,mass_drift,energy_drift,final_time,stop,exit_code,pass";

    pub fn pass(&self) -> bool {
        self.exit_code == 0
    }

    pub fn csv_row(&self) -> String {
        fn f<T: std::fmt::Display>(x: Option<T>) -> String {
            x.map_or(String::new(), |v| v.to_string())
        }
        let p = &self.point;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.run,
            f(p.s),
            f(p.gamma),
            f(p.eta),
            f(p.points),
            f(p.amplitude),
            f(self.certified_t.map(|x| format!("{x:e}"))),
            f(self.mass_drift.map(|x| format!("{x:e}"))),
            f(self.energy_drift.map(|x| format!("{x:e}"))),
            f(self.final_time),
            self.stop,
            self.exit_code,
            self.pass()
        )
    }
}

fn thread_cap(max_parallel: usize) -> usize {
    let env = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    env.map_or(max_parallel, |n| n.min(max_parallel)).max(1)
}

fn run_one(base: &RunConfig, p: &SweepPoint, dir: &Path, run: usize) -> SweepRow {
    let mut row = SweepRow {
        run,
        point: *p,
        certified_t: None,
        mass_drift: None,
        energy_drift: None,
        final_time: None,
        stop: String::new(),
        exit_code: 0,
    };
    let result = apply_point(base, p).and_then(|cfg| simulate(&cfg, dir, SimulateOptions::default()));
    match result {
        Ok(s) => {
            row.certified_t = s.certified_t;
            row.mass_drift = Some(s.mass_drift);
            row.energy_drift = Some(s.energy_drift);
            row.final_time = Some(s.final_time);
            row.stop = serde_json::to_value(&s.stop)
                .ok()
                .and_then(|v| v["reason"].as_str().map(String::from))
                .unwrap_or_default();
            row.exit_code = s.exit_code;
        }
        Err(e) => {
            let _ = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join("error.txt"), e.to_string() + "\n"));
            row.stop = format!("error: {}", e.to_string().replace([',', '\n'], ";"));
            row.exit_code = exit_code_for_error(&e);
        }
    }
    row
}

/// Run every point into `out_dir/run_NNN` and write `out_dir/summary.csv`.
/// Failed runs are recorded, the others still run.
pub fn run_sweep(base: &RunConfig, sweep: &SweepSpec, out_dir: &Path) -> Result<Vec<SweepRow>> {
    let points = sweep_points(&sweep.axes);
    if points.len() > sweep.max_runs {
        return Err(FnlsError::Config(format!(
            "sweep has {} runs, more than max_runs = {}",
            points.len(),
            sweep.max_runs
        )));
    }
    fs::create_dir_all(out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_cap(sweep.max_parallel))
        .build()
        .map_err(|e| FnlsError::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, p)| run_one(base, p, &out_dir.join(format!("run_{i:03}")), i))
            .collect()
    });
    let mut csv = String::from(SweepRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    fs::write(out_dir.join("summary.csv"), csv)?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_shapes() {
        assert_eq!(sweep_points(&Axes::default()), vec![SweepPoint::default()]);
        let axes = Axes { s: vec![1.0, 2.0], gamma: vec![1.0, 3.0], ..Axes::default() };
        let pts = sweep_points(&axes);
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[1], SweepPoint { s: Some(1.0), gamma: Some(3.0), ..SweepPoint::default() });
    }

    #[test]
    fn caps() {
        let err = parse_sweep("max_runs = 2\n[axes]\ns = [1.0, 2.0, 3.0]\n").unwrap_err();
        assert!(err.to_string().contains("max_runs"));
        assert!(parse_sweep("[axes]\neta = [1.0]\namplitude = [2.0]\n").is_err());
        assert_eq!(parse_sweep("").unwrap(), SweepSpec::default());
    }
}
