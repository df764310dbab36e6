//! `freeclt`: run one experiment, write its CSV tables, report verdicts.
//!
//! Exit status is 0 when every verdict passes, 1 when one fails and 2 on
//! errors (bad arguments, numerical failures).

use anyhow::{Context, Result};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

use freeclt::experiment::{run, ExperimentConfig, ExperimentKind};
use freeclt::meixner::MeixnerChoice;

#[derive(Debug, Parser)]
#[command(name = "freeclt", version, about = "Free central limit theorem experiments")]
struct Args {
    /// JSON configuration file; command-line flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset (bernoulli, tilted_bernoulli(p), semicircle, arcsine) or JSON measure file.
    #[arg(long)]
    measure: Option<String>,
    /// convolve, rates, meixner, edgeworth, formal or entropy.
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    /// Comma-separated, strictly increasing list of n.
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<u64>>,
    /// Chebyshev nodes per support interval.
    #[arg(long)]
    grid: Option<usize>,
    /// Distance from the real axis for Stieltjes inversion.
    #[arg(long)]
    eps: Option<f64>,
    /// Fixed-point tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Highest correction B_k in the formal experiment.
    #[arg(long)]
    kmax: Option<u8>,
    /// Laurent order M in the formal experiment.
    #[arg(long)]
    order: Option<usize>,
    /// Also write gnuplot-style .dat files.
    #[arg(long)]
    plots: bool,
    /// Meixner parameters as JSON, e.g. '{"a":0.2,"b":0,"d":0}'.
    #[arg(long)]
    meixner: Option<String>,
    /// Skip the grid-doubling convergence guard of the entropy sweep.
    #[arg(long)]
    skip_guard: bool,
}

fn build_config(args: Args) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::from_json_str(&text)?
        }
        None => {
            let measure = args.measure.clone().unwrap_or_else(|| "bernoulli".into());
            let experiment = args.experiment.context("--experiment is required without --config")?;
            ExperimentConfig::new(&measure, experiment)
        }
    };
    if let Some(m) = args.measure {
        cfg.measure = m;
    }
    if let Some(e) = args.experiment {
        cfg.experiment = e;
    }
    if let Some(ns) = args.ns {
        cfg.ns = ns;
    }
    if args.grid.is_some() {
        cfg.grid = args.grid;
    }
    if let Some(eps) = args.eps {
        cfg.eps = eps;
    }
    if let Some(tol) = args.tol {
        cfg.tol = tol;
    }
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(k) = args.kmax {
        cfg.kmax = k;
    }
    if let Some(m) = args.order {
        cfg.order = m;
    }
    cfg.plots |= args.plots;
    cfg.skip_guard |= args.skip_guard;
    if let Some(text) = args.meixner {
        cfg.meixner = Some(MeixnerChoice::from_json_str(&text)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FREECLT_THREADS") {
        let n: usize = v.parse().with_context(|| format!("FREECLT_THREADS={v} is not a count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global()?;
    }
    Ok(())
}

fn main_inner() -> Result<bool> {
    let args = Args::parse();
    configure_threads()?;
    let cfg = build_config(args)?;
    let outcome = run(&cfg).with_context(|| format!("{} experiment failed", cfg.experiment))?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    for v in &outcome.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    Ok(outcome.passed())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
