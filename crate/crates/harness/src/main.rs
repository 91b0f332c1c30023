use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hypspec_harness::config::{parse_config, Experiment, ExperimentConfig};
use hypspec_harness::error::{HarnessError, HarnessResult};
use hypspec_harness::{parse_fit_csv, refit, run_experiment, write_outputs};

#[derive(Parser)]
#[command(name = "hypspec", version, about = "Spectral projector experiments on the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Key/value configuration file; defaults are used for missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: out/<experiment>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 picks the number of cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Seed for randomized sample points.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized sups of the p and q kernels across lambda octaves.
    KernelScan(Common),
    /// L^p / L^2 ratios of the radial extremizer.
    SphericalScan(Common),
    /// L^p / L^2 ratios of the Knapp-type extremizer.
    KnappScan(Common),
    /// Cylinder spectral-measure identity, quasi-periodicity and Poincaré series.
    CylinderCheck(Common),
    /// sup_r |K(t, r)| of the Schrödinger kernel against t.
    DispersiveScan(Common),
    /// Norms of the subordination weight Z against eta.
    ZScan(Common),
    /// Truncated L^p norms of the cusp counterexample.
    CuspRun(Common),
    /// Strip behaviour of spherical functions and multiplier continuation.
    StripCheck(Common),
    /// Refit a slope from a CSV column pair.
    Fit(FitArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    x: String,
    #[arg(long)]
    y: String,
    /// Keep only rows with COLUMN=VALUE.
    #[arg(long, value_name = "COLUMN=VALUE")]
    filter: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    target: f64,
    #[arg(long, default_value_t = 0.05)]
    tol: f64,
}

fn load(experiment: Experiment, common: &Common) -> HarnessResult<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
            let cfg = parse_config(&text)?;
            if cfg.experiment != experiment {
                return Err(HarnessError::Config {
                    line: 0,
                    message: format!("config is for {}, not {experiment}", cfg.experiment),
                });
            }
            cfg
        }
        None => parse_config(&format!("experiment = {experiment}\n"))?,
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if common.overwrite {
        cfg.overwrite = true;
    }
    Ok(cfg)
}

/// 0 when every flag passes, 2 on a failed tolerance.
fn run(experiment: Experiment, common: &Common) -> HarnessResult<u8> {
    let cfg = load(experiment, common)?;
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.name()));
    let summary = run_experiment(&cfg, common.threads)?;
    let files = write_outputs(&summary, &out, cfg.overwrite)?;
    for f in &summary.fits {
        println!(
            "fit  {:<44} slope {:>10.5}  target {:>8.5} +- {:<6} {}",
            f.name,
            f.slope.0,
            f.target,
            f.tolerance,
            if f.pass { "pass" } else { "FAIL" }
        );
    }
    for f in &summary.flags {
        println!("flag {:<44} value {:>10.3e}  bound {:>8.1e} {}", f.name, f.value.0, f.bound, if f.pass { "pass" } else { "FAIL" });
    }
    for c in summary.cells.iter().filter(|c| c.error.is_some()) {
        eprintln!("cell {}: {}", c.id, c.error.as_deref().unwrap_or(""));
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    if summary.cell_errors() > 0 {
        return Err(HarnessError::CellsFailed(summary.cell_errors()));
    }
    Ok(if summary.all_pass() { 0 } else { 2 })
}

fn fit(a: &FitArgs) -> HarnessResult<u8> {
    let text = fs::read_to_string(&a.csv).map_err(|source| HarnessError::Io { path: a.csv.clone(), source })?;
    let filter = match &a.filter {
        Some(f) => Some(
            f.split_once('=')
                .ok_or_else(|| HarnessError::Config { line: 0, message: format!("filter '{f}' must be COLUMN=VALUE") })?,
        ),
        None => None,
    };
    let pts = parse_fit_csv(&text, &a.x, &a.y, filter)?;
    let rec = refit(&pts, &format!("{} vs {}", a.y, a.x), a.target, a.tol)?;
    println!("{}", serde_json::to_string_pretty(&rec)?);
    Ok(if rec.pass { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::KernelScan(c) => run(Experiment::KernelScan, c),
        Command::SphericalScan(c) => run(Experiment::SphericalScan, c),
        Command::KnappScan(c) => run(Experiment::KnappScan, c),
        Command::CylinderCheck(c) => run(Experiment::CylinderCheck, c),
        Command::DispersiveScan(c) => run(Experiment::DispersiveScan, c),
        Command::ZScan(c) => run(Experiment::ZScan, c),
        Command::CuspRun(c) => run(Experiment::CuspRun, c),
        Command::StripCheck(c) => run(Experiment::StripCheck, c),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
