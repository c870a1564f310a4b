//! `estimate-window`: certified existence window at the initial data.

use std::fmt::Write;

use fnls_core::config::RunConfig;
use fnls_core::estimates::{existence_window, sample_eta_norm, EstimateReport, WellPosednessWindow};
use fnls_core::solver::WindowConstants;
use fnls_core::verification::calibrate_constants;
use fnls_core::Result;

fn line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key:<22}{value}");
}

fn window_block(out: &mut String, w: &WellPosednessWindow, consts: &WindowConstants) {
    line(out, "R", format!("{:.6e}", w.r));
    line(out, "T", format!("{:.6e}", w.t));
    line(out, "T_map_into_ball", format!("{:.6e}", w.bounds[0]));
    line(out, "T_contraction", format!("{:.6e}", w.bounds[1]));
    line(out, "T_infimum_floor", format!("{:.6e}", w.bounds[2]));
    line(out, "first_estimate", format!("{:.6e}", w.first_estimate));
    line(out, "second_estimate", format!("{:.6e}", w.second_estimate));
    line(out, "conditions", format!("{:?}", w.conditions));
    line(
        out,
        "constants",
        format!(
            "c={:e} c_lemma={:e} c0={:e} c_beta={:?} c1={}",
            consts.c,
            consts.c_lemma,
            consts.c0,
            consts.c_beta,
            consts.c1.map_or("computed".to_string(), |v| format!("{v:e}"))
        ),
    );
}

/// Structured text report; `fit` also calibrates `c_lemma` on
/// perturbations of the initial data and reports the resulting window.
pub fn estimate_window_report(cfg: &RunConfig, fit: bool) -> Result<String> {
    let solver = cfg.solver_config();
    let spec = cfg.spec();
    let u0 = cfg.initial_field()?;
    let grid = *u0.grid();
    let (eta, norm) = sample_eta_norm(&u0, solver.j)?;
    let consts = solver.constants.resolve(&grid, solver.j)?;
    let mut out = String::new();
    line(&mut out, "nonlinearity", spec.label());
    line(&mut out, "s", solver.s);
    line(&mut out, "J", solver.j);
    line(&mut out, "N", grid.dim());
    line(&mut out, "M", grid.points());
    line(&mut out, "eta", format!("{eta:.6e}"));
    line(&mut out, "norm_u0", format!("{norm:.6e}"));
    line(&mut out, "c1_embed", format!("{:.6e}", consts.c1_embed));
    line(&mut out, "c1_power", format!("{:.6e}", consts.c1_power));
    let report = EstimateReport::compute(&spec, eta, norm, Some(norm), solver.j, grid.dim(), &consts)?;
    line(&mut out, "sup_n", format!("{:.6e}", report.sn));
    for (key, v) in [
        ("k_constant", report.k_constant),
        ("g1", report.g1),
        ("g2", report.g2),
        ("gamma1_sum", report.gamma1),
        ("gamma2_sum", report.gamma2),
    ] {
        if let Some(v) = v {
            line(&mut out, key, format!("{v:.6e}"));
        }
    }
    let w = existence_window(&spec, norm, eta, solver.j, grid.dim(), &consts)?;
    line(&mut out, "family", format!("{:?}", w.family).to_lowercase());
    out.push_str("[configured]\n");
    window_block(&mut out, &w, &solver.constants);
    if fit {
        let fitted = calibrate_constants(&spec, &u0, &solver, cfg.constants.seed)?;
        let resolved = fitted.resolve(&grid, solver.j)?;
        let wf = existence_window(&spec, norm, eta, solver.j, grid.dim(), &resolved)?;
        out.push_str("[fitted]\n");
        window_block(&mut out, &wf, &fitted);
    }
    Ok(out)
}
