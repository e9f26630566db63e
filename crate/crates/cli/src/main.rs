use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Parser;
use softcell::conic::dump;
use softcell::coordination::{build_relaxation, CoordinationProblem};
use softcell::scenario::ScenarioConfig;
use softcell::sim::{aggregate, parse_algorithms, parse_values, records_csv, run_sweep, summary_csv, Axis, SweepSpec};

/// Monte Carlo sweeps of coordinated BS/SCA beamforming.
///
/// Writes one CSV row per (axis value, algorithm, trial).
#[derive(Debug, Parser)]
#[command(name = "softcell", version)]
struct Args {
    /// Scenario configuration (TOML).
    #[arg(long, conflicts_with = "full_paper_setup")]
    config: Option<PathBuf>,
    /// Parameter to sweep.
    #[arg(long, default_value = "n_bs", value_parser = |s: &str| s.parse::<Axis>())]
    sweep: Axis,
    /// Comma-separated axis values [default: 8,16,24 for n_bs; 0,1,2 for n_sca; 1,2,3 for qos].
    #[arg(long)]
    values: Option<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Comma-separated subset of optimal,rzf,bs_only.
    #[arg(long, default_value = "optimal")]
    algorithms: String,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Records CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Aggregate CSV grouped by (axis value, algorithm).
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Larger geometry: 4 SCAs, 10 users, 50 BS antennas, 2 per SCA.
    #[arg(long)]
    full_paper_setup: bool,
    /// Fill wall_ms with measured times (output is then not reproducible).
    #[arg(long)]
    record_timing: bool,
    /// Report the optimal solution when the RZF power allocation is infeasible.
    #[arg(long)]
    rzf_fallback: bool,
    /// Write the relaxation of trial 0 at the first axis value and exit.
    #[arg(long, value_name = "PATH")]
    dump_relaxation: Option<PathBuf>,
}

fn default_values(axis: Axis) -> Vec<f64> {
    match axis {
        Axis::NBs => vec![8.0, 16.0, 24.0],
        Axis::NSca => vec![0.0, 1.0, 2.0],
        Axis::Qos => vec![1.0, 2.0, 3.0],
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).context("writing stdout"),
    }
}

fn main() -> Result<()> {
    let args = Args::parse();
    let mut base = match (&args.config, args.full_paper_setup) {
        (Some(path), _) => ScenarioConfig::from_file(path)?,
        (None, true) => ScenarioConfig::large_setup(),
        (None, false) => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    let values = match &args.values {
        Some(v) => parse_values(v)?,
        None => default_values(args.sweep),
    };
    let mut spec = SweepSpec::new(args.sweep, values, args.trials, parse_algorithms(&args.algorithms)?, base);
    spec.workers = args.workers;
    spec.rzf_fallback = args.rzf_fallback;
    spec.record_timing = args.record_timing;
    spec.validate()?;

    if let Some(path) = &args.dump_relaxation {
        let problem = CoordinationProblem::from_scenario(&spec.config_for(spec.values[0]), 0)?;
        let relaxation = build_relaxation(&problem)?;
        fs::write(path, dump::write(&relaxation.conic)).with_context(|| format!("writing {}", path.display()))?;
        return Ok(());
    }

    let records = run_sweep(&spec)?;
    write_output(args.out.as_ref(), &records_csv(&records))?;
    if let Some(path) = &args.summary {
        let rows = aggregate(&records)?;
        fs::write(path, summary_csv(&rows)).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
