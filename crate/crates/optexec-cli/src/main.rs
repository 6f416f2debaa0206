//! Command-line driver for the execution-scheduling benchmark library.
//!
//! Subcommands:
//! - `run`      — full strategy-vs-oracle benchmark from a JSON config
//! - `converge` — scenario-count convergence study for a Monte Carlo strategy
//! - `oracle`   — a-posteriori optimal cost only (strategies forced to ORACLE)

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optexec::experiment::{
    convergence_study, run_experiment, write_convergence_csv, write_outputs, ExperimentConfig,
    Scale,
};
use optexec::strategies::StrategyKind;

#[derive(Parser)]
#[command(
    name = "optexec",
    version,
    about = "Optimal trade execution under stochastic liquidity and volatility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment configuration file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Preset problem size overriding the config's M/R/N ('desk' or 'paper').
    #[arg(long, value_name = "SCALE")]
    scale: Option<String>,
    /// Output directory (default: the config's `output` field, else 'out').
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: one per available CPU).
    #[arg(long, value_name = "K")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured strategies against the a-posteriori oracle.
    Run {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare sampler accuracy as the inner scenario count grows.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated scenario counts, e.g. 64,128,256,512.
        #[arg(long, value_name = "LIST", default_value = "64,128,256,512")]
        n: String,
        /// Independent inner streams per scenario count.
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        /// Fixed outer coefficient paths to average the study over.
        #[arg(long, default_value_t = 10)]
        states: usize,
        /// Strategy to study: RHMC_I or RHMC_II.
        #[arg(long, default_value = "RHMC_I")]
        strategy: String,
    },
    /// Compute only the a-posteriori optimal benchmark cost.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> optexec::Result<()> {
    match cli.command {
        Command::Run { common } => {
            let (config, out_dir) = load(&common)?;
            run_and_report(&config, &out_dir)
        }
        Command::Oracle { common } => {
            let (mut config, out_dir) = load(&common)?;
            config.strategies = vec![StrategyKind::Oracle];
            run_and_report(&config, &out_dir)
        }
        Command::Converge {
            common,
            n,
            repeats,
            states,
            strategy,
        } => {
            let (config, out_dir) = load(&common)?;
            let n_list = parse_n_list(&n)?;
            let kind: StrategyKind = serde_json::from_value(serde_json::Value::String(
                strategy.clone(),
            ))
            .map_err(|_| {
                optexec::Error::Config(format!(
                    "unknown strategy '{strategy}' (expected RHMC_I or RHMC_II)"
                ))
            })?;
            let rows = convergence_study(&config, kind, &n_list, repeats, states)?;
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join("convergence.csv");
            write_convergence_csv(&rows, &path)?;
            print_convergence_summary(&rows, &n_list);
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn load(common: &CommonArgs) -> optexec::Result<(ExperimentConfig, PathBuf)> {
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(optexec::Error::Config("--threads must be at least 1".into()));
        }
        // Ignore the error if a global pool already exists (e.g. repeated
        // calls in one process); the existing pool is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let mut config = ExperimentConfig::from_path(&common.config)?;
    if let Some(scale) = &common.scale {
        config.apply_scale(scale.parse::<Scale>()?);
    }
    let out_dir = common
        .out
        .clone()
        .or_else(|| config.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    Ok((config, out_dir))
}

fn run_and_report(config: &ExperimentConfig, out_dir: &PathBuf) -> optexec::Result<()> {
    let outcome = run_experiment(config)?;
    write_outputs(&outcome, out_dir)?;
    println!(
        "{} paths x {} steps, {} scenarios ({}), seed {}",
        config.outer_paths,
        config.grid.steps,
        config.inner.scenarios,
        match config.inner.sampler {
            optexec::noise::SamplerKind::Pseudo => "mc",
            optexec::noise::SamplerKind::Sobol => "qmc",
        },
        config.master_seed
    );
    println!(
        "{:<8} {:>14} {:>12} {:>10}",
        "strategy", "mean_cost", "stderr", "vs_oracle"
    );
    for res in &outcome.results {
        let pct = res
            .pct_excess_vs_oracle
            .map(|p| format!("{p:+.3}%"))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:<8} {:>14.6} {:>12.2e} {:>10}",
            res.strategy.label(),
            res.aggregate.mean,
            res.aggregate.stderr,
            pct
        );
    }
    if outcome.impact_projections > 0 {
        println!(
            "note: {} impact-matrix eigenvalue projections",
            outcome.impact_projections
        );
    }
    if outcome.oracle_fallbacks > 0 {
        println!(
            "note: {} oracle solves used the elimination fallback",
            outcome.oracle_fallbacks
        );
    }
    println!(
        "wrote results.csv, results.json, meta.json to {} ({:.1}s)",
        out_dir.display(),
        outcome.elapsed_seconds
    );
    Ok(())
}

fn parse_n_list(text: &str) -> optexec::Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let v: usize = part
            .trim()
            .parse()
            .map_err(|_| optexec::Error::Config(format!("bad scenario count '{part}'")))?;
        if v == 0 {
            return Err(optexec::Error::Config(
                "scenario counts must be at least 1".into(),
            ));
        }
        out.push(v);
    }
    Ok(out)
}

fn print_convergence_summary(rows: &[optexec::experiment::ConvergenceRow], n_list: &[usize]) {
    use optexec::noise::SamplerKind;
    println!(
        "{:>8} {:>14} {:>14} {:>8}",
        "N", "qmc_spread", "mc_spread", "ratio"
    );
    for &n in n_list {
        let mean_spread = |kind: SamplerKind| {
            let sel: Vec<f64> = rows
                .iter()
                .filter(|r| r.scenario_count == n && r.sampler == kind)
                .map(|r| r.spread)
                .collect();
            sel.iter().sum::<f64>() / sel.len().max(1) as f64
        };
        let q = mean_spread(SamplerKind::Sobol);
        let m = mean_spread(SamplerKind::Pseudo);
        let ratio = if m > 0.0 { q / m } else { f64::NAN };
        println!("{n:>8} {q:>14.6e} {m:>14.6e} {ratio:>8.3}");
    }
}
