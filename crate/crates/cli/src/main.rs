//! `slipstream`: validate, run, fit and report vanishing-viscosity sweeps.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use slipstream::sweep::{self, read_ledger, RunOptions, SweepPlan};
use slipstream::verify::battery;

#[derive(Parser)]
#[command(name = "slipstream", version, about = "Inviscid-limit sweeps for 2D Navier-Stokes with Navier slip walls")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a plan file without running it.
    Validate { plan: PathBuf },
    /// Run a sweep and write the ledger, manifests and gap series.
    Run {
        plan: PathBuf,
        /// Parallel runs (default: the plan's `jobs`, else 1).
        #[arg(long)]
        jobs: Option<usize>,
        /// Skip runs already in the ledger with a matching manifest.
        #[arg(long)]
        resume: bool,
        /// Output directory (default: the plan's `out`, else `out/<name>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Refuse to start when any run fails the layer-resolution checks.
        #[arg(long)]
        strict_resolution: bool,
    },
    /// Fit gap exponents per beta from a ledger.
    Fit {
        /// Ledger file or sweep output directory.
        ledger: PathBuf,
        /// Include runs flagged as under-resolved.
        #[arg(long)]
        include_unresolved: bool,
    },
    /// Write summary tables and plot data for a ledger.
    Report {
        /// Ledger file or sweep output directory.
        ledger: PathBuf,
        /// Report directory (default: `report/` next to the ledger).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle and invariant battery.
    Verify,
}

/// Accepts either the ledger file or the sweep output directory.
fn ledger_path(p: PathBuf) -> PathBuf {
    if p.is_dir() {
        p.join("ledger.csv")
    } else {
        p
    }
}

const EXIT_CHECKS: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn dispatch(cmd: Cmd) -> slipstream::Result<u8> {
    match cmd {
        Cmd::Validate { plan } => {
            let p = SweepPlan::load(&plan)?;
            p.validate()?;
            let grid = slipstream::field::Grid::new(p.grid_spec())?;
            let unresolved: Vec<String> = p
                .runs()
                .into_iter()
                .filter(|&(e, b)| !p.resolved(&grid, e, b))
                .map(|(e, b)| sweep::run_id(e, b))
                .collect();
            println!("{}: {} runs, {} strip factors", p.name, p.runs().len(), p.kappa.len());
            if unresolved.is_empty() {
                Ok(0)
            } else {
                println!("under-resolved (excluded from fits): {}", unresolved.join(", "));
                Ok(EXIT_CHECKS)
            }
        }
        Cmd::Run {
            plan,
            jobs,
            resume,
            out,
            strict_resolution,
        } => {
            let p = SweepPlan::load(&plan)?;
            let out = out
                .or_else(|| p.out.clone())
                .unwrap_or_else(|| Path::new("out").join(&p.name));
            let opts = RunOptions {
                out: out.clone(),
                jobs: jobs.or(p.jobs).unwrap_or(1),
                resume,
                strict_resolution,
            };
            let o = sweep::run_sweep(&p, &opts)?;
            println!(
                "{} runs executed, {} skipped, {} Euler references; ledger at {}",
                o.executed.len(),
                o.skipped.len(),
                o.euler_runs,
                out.join("ledger.csv").display()
            );
            for (id, msg) in &o.failures {
                println!("failed {id}: {msg}");
            }
            if !o.unresolved.is_empty() {
                println!("under-resolved (excluded from fits): {}", o.unresolved.join(", "));
            }
            Ok(if o.failures.is_empty() { 0 } else { EXIT_CHECKS })
        }
        Cmd::Fit {
            ledger,
            include_unresolved,
        } => {
            let mut rows = read_ledger(&ledger_path(ledger))?;
            if include_unresolved {
                rows.iter_mut().for_each(|r| r.resolved = true);
            }
            let r = sweep::report(&rows, None)?;
            println!("{:>8} {:>10} {:>10} {:>8}", "beta", "slope", "predicted", "r2");
            for row in &r.rates {
                match &row.l2 {
                    Some(f) => println!("{:>8.4} {:>10.4} {:>10.4} {:>8.4}", row.beta, f.slope, row.predicted_l2, f.r2),
                    None => println!(
                        "{:>8.4} {:>10} {:>10.4}   {}",
                        row.beta,
                        "-",
                        row.predicted_l2,
                        row.l2_note.as_deref().unwrap_or("")
                    ),
                }
            }
            Ok(0)
        }
        Cmd::Report { ledger, out } => {
            let ledger = ledger_path(ledger);
            let rows = read_ledger(&ledger)?;
            let base = ledger.parent().unwrap_or(Path::new("."));
            let r = sweep::report(&rows, Some(base))?;
            let dir = out.unwrap_or_else(|| base.join("report"));
            sweep::write_report(&r, &rows, &dir)?;
            print!("{}", r.summary());
            println!("written to {}", dir.display());
            Ok(if r.matsui_bound_violations.is_empty() { 0 } else { EXIT_CHECKS })
        }
        Cmd::Verify => {
            let start = Instant::now();
            let checks = battery::battery();
            for c in &checks {
                println!("{}", c.line());
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            println!(
                "{} checks, {} failed, {:.1} s",
                checks.len(),
                failed,
                start.elapsed().as_secs_f64()
            );
            Ok(if failed == 0 { 0 } else { EXIT_CHECKS })
        }
    }
}
