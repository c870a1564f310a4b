use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fnls_cli::estimate::estimate_window_report;
use fnls_cli::runner::{exit_code_for_error, simulate, SimulateOptions};
use fnls_cli::sweep::{parse_sweep, run_sweep};
use fnls_core::config::{parse_config, DiagnosticsFormat, RunConfig};
use fnls_core::diagnostics::mass;
use fnls_core::norms::NormReport;
use fnls_core::snapshot::load_snapshot;
use fnls_core::verification::{run_verification_suite, CHECK_NAMES};
use fnls_core::{FnlsError, Result};

#[derive(Parser)]
#[command(name = "fnls", version, about = "Fractional NLS solver on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Diagnostics {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configuration and write a run directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
        #[arg(long)]
        snapshot_every: Option<usize>,
        #[arg(long, value_enum)]
        diagnostics: Option<Diagnostics>,
    },
    /// Certified existence window at the initial data.
    EstimateWindow {
        #[arg(long)]
        config: PathBuf,
        /// Also fit c_lemma on perturbations of the initial data.
        #[arg(long)]
        fit: bool,
    },
    /// Run the numerical checks and print one JSON object per check.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated check names; all when omitted.
        #[arg(long, value_delimiter = ',')]
        checks: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the product of the sweep axes over a base configuration.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        output_dir: PathBuf,
    },
    /// Print header and norms of a snapshot file.
    InspectSnapshot {
        path: PathBuf,
        #[arg(long, default_value_t = 2)]
        j: u32,
    },
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| FnlsError::Io(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<RunConfig> {
    parse_config(&read_text(path)?)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { config, output_dir, snapshot_every, diagnostics } => {
            let cfg = load_config(&config)?;
            let opts = SimulateOptions {
                snapshot_every,
                diagnostics: diagnostics.map(|d| match d {
                    Diagnostics::Csv => DiagnosticsFormat::Csv,
                    Diagnostics::Jsonl => DiagnosticsFormat::Jsonl,
                }),
            };
            let summary = simulate(&cfg, &output_dir, opts)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(summary.exit_code)
        }
        Command::EstimateWindow { config, fit } => {
            print!("{}", estimate_window_report(&load_config(&config)?, fit)?);
            Ok(0)
        }
        Command::Verify { seed, checks, output } => {
            if let Some(bad) = checks.iter().find(|c| !CHECK_NAMES.contains(&c.as_str())) {
                return Err(FnlsError::Config(format!(
                    "unknown check `{bad}`; known: {}",
                    CHECK_NAMES.join(", ")
                )));
            }
            let result = run_verification_suite(seed, &checks);
            let lines = result.to_json_lines();
            match output {
                Some(p) => fs::write(&p, lines)?,
                None => print!("{lines}"),
            }
            for c in &result.checks {
                eprintln!(
                    "{:<20} {} {}/{} worst_ratio={:e}",
                    c.name,
                    if c.pass { "PASS" } else { "FAIL" },
                    c.passed,
                    c.samples,
                    c.worst_ratio
                );
            }
            Ok(0)
        }
        Command::Sweep { config, sweep, output_dir } => {
            let base = load_config(&config)?;
            let spec = parse_sweep(&read_text(&sweep)?)?;
            let rows = run_sweep(&base, &spec, &output_dir)?;
            let failed = rows.iter().filter(|r| !r.pass()).count();
            println!("{} runs, {failed} failed; summary in {}", rows.len(), output_dir.join("summary.csv").display());
            Ok(0)
        }
        Command::InspectSnapshot { path, j } => {
            let snap = load_snapshot(&path)?;
            let grid = snap.field.grid();
            let n = NormReport::compute(&snap.field, j, 4)?;
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "dim               {}", grid.dim());
            let _ = writeln!(out, "points            {}", grid.points());
            let _ = writeln!(out, "s                 {}", snap.s);
            let _ = writeln!(out, "t                 {}", snap.t);
            let _ = writeln!(out, "mass              {:.12e}", mass(&snap.field));
            let _ = writeln!(out, "l2                {:.12e}", n.l2);
            let _ = writeln!(out, "h{j}_spectral       {:.12e}", n.h_spectral);
            let _ = writeln!(out, "h{j}_derivative_sum {:.12e}", n.h_derivative_sum);
            let _ = writeln!(out, "l_inf             {:.12e}", n.l_inf);
            let _ = writeln!(out, "inf_lower_bound   {:.12e}", n.inf_lower_bound);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for_error(&e)
        }
    };
    ExitCode::from(code as u8)
}
