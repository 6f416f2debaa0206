//! Experiment configuration, the strategy-vs-oracle benchmark runner, and
//! the scenario-count convergence study.
//!
//! A run compares the configured strategies over R independent outer
//! coefficient paths. Every strategy sees the same outer paths and (for the
//! Monte Carlo strategies) the same inner noise streams, so cost differences
//! are strategy differences, not sampling differences. All randomness is
//! derived from one master seed through tagged streams, making every output
//! byte-for-byte reproducible for a fixed configuration.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costeval::{aggregate, path_cost, Aggregate};
use crate::grid::TimeGrid;
use crate::market::{sample_paths, MarketModel, NoiseSource};
use crate::noise::{derive_seed, stream, SamplerKind};
use crate::oracle::discrete_optimal;
use crate::strategies::{run_strategy, InnerNoise, StrategyKind};
use crate::{Error, Result};

/// Fixed per-path relative slack for the oracle-dominance floor.
const DOMINANCE_FLOOR: f64 = -1e-7;

/// Model section of a config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelConfig {
    pub n: usize,
    pub sigma_bar: Vec<f64>,
    /// n·n entries, row-major.
    pub eta_bar: Vec<f64>,
    /// n·n entries, row-major; identity when omitted.
    #[serde(default)]
    pub rho: Option<Vec<f64>>,
    /// d = n(n+3)/2 mean-reversion times.
    pub delta: Vec<f64>,
    /// d dispersions.
    pub beta: Vec<f64>,
    /// d·d entries, row-major; identity when omitted.
    #[serde(default)]
    pub varrho: Option<Vec<f64>>,
    pub lambda: f64,
    /// Single-asset constrained mode: liquidity co-varies with volatility so
    /// that σ²(t)η(t) stays constant. Uses delta[0]/beta[0] as the base
    /// volatility driver and derives the liquidity driver from it.
    #[serde(default)]
    pub coordinated_variation: bool,
}

/// Grid section: horizon T and step count M.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridConfig {
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(rename = "M")]
    pub steps: usize,
}

/// Inner-noise section: sampler kind and scenario count N per decision step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InnerConfig {
    pub sampler: SamplerKind,
    #[serde(rename = "N")]
    pub scenarios: usize,
}

/// Full experiment description, deserialized from JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub x0: Vec<f64>,
    pub strategies: Vec<StrategyKind>,
    pub outer_paths: usize,
    pub inner: InnerConfig,
    pub master_seed: u64,
    /// Default output directory for the command-line runner.
    #[serde(default)]
    pub output: Option<String>,
}

/// Preset problem sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// M = 100 steps, R = 50 outer paths, N = 200 scenarios.
    Desk,
    /// M = 1000 steps, R = 200 outer paths, N = 500 scenarios.
    Paper,
}

impl std::str::FromStr for Scale {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            other => Err(Error::Config(format!(
                "unknown scale '{other}' (expected 'desk' or 'paper')"
            ))),
        }
    }
}

impl ExperimentConfig {
    /// Parse a JSON config string.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and parse a JSON config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    /// Override the preset-controlled sizes (step count, outer paths,
    /// scenarios); the horizon and model are untouched.
    pub fn apply_scale(&mut self, scale: Scale) {
        match scale {
            Scale::Desk => {
                self.grid.steps = 100;
                self.outer_paths = 50;
                self.inner.scenarios = 200;
            }
            Scale::Paper => {
                self.grid.steps = 1000;
                self.outer_paths = 200;
                self.inner.scenarios = 500;
            }
        }
    }

    /// Structural validation beyond what serde enforces.
    pub fn validate(&self) -> Result<()> {
        let n = self.model.n;
        if n == 0 {
            return Err(Error::Config("model.n must be at least 1".into()));
        }
        let d = n * (n + 3) / 2;
        if self.model.sigma_bar.len() != n {
            return Err(Error::Config(format!(
                "model.sigma_bar must have n = {n} entries, got {}",
                self.model.sigma_bar.len()
            )));
        }
        if self.model.eta_bar.len() != n * n {
            return Err(Error::Config(format!(
                "model.eta_bar must have n*n = {} entries, got {}",
                n * n,
                self.model.eta_bar.len()
            )));
        }
        if let Some(r) = &self.model.rho {
            if r.len() != n * n {
                return Err(Error::Config(format!(
                    "model.rho must have n*n = {} entries, got {}",
                    n * n,
                    r.len()
                )));
            }
        }
        if self.model.coordinated_variation {
            if n != 1 {
                return Err(Error::Config(
                    "model.coordinated_variation requires n = 1".into(),
                ));
            }
            if self.model.delta.is_empty() || self.model.beta.is_empty() {
                return Err(Error::Config(
                    "model.delta and model.beta need at least the base driver entry".into(),
                ));
            }
        } else {
            if self.model.delta.len() != d {
                return Err(Error::Config(format!(
                    "model.delta must have d = n(n+3)/2 = {d} entries, got {}",
                    self.model.delta.len()
                )));
            }
            if self.model.beta.len() != d {
                return Err(Error::Config(format!(
                    "model.beta must have d = n(n+3)/2 = {d} entries, got {}",
                    self.model.beta.len()
                )));
            }
            if let Some(v) = &self.model.varrho {
                if v.len() != d * d {
                    return Err(Error::Config(format!(
                        "model.varrho must have d*d = {} entries, got {}",
                        d * d,
                        v.len()
                    )));
                }
            }
        }
        if self.x0.len() != n {
            return Err(Error::Config(format!(
                "x0 must have n = {n} entries, got {}",
                self.x0.len()
            )));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies must be non-empty".into()));
        }
        if self.outer_paths == 0 {
            return Err(Error::Config("outer_paths must be at least 1".into()));
        }
        if self.inner.scenarios == 0 {
            return Err(Error::Config("inner.N must be at least 1".into()));
        }
        Ok(())
    }

    /// Build the validated market model.
    pub fn build_model(&self) -> Result<MarketModel> {
        let n = self.model.n;
        if self.model.coordinated_variation {
            return MarketModel::coordinated_variation(
                self.model.sigma_bar[0],
                self.model.eta_bar[0],
                self.model.delta[0],
                self.model.beta[0],
                self.model.lambda,
            );
        }
        let d = n * (n + 3) / 2;
        let rho = match &self.model.rho {
            Some(r) => DMatrix::from_row_slice(n, n, r),
            None => DMatrix::identity(n, n),
        };
        let varrho = match &self.model.varrho {
            Some(v) => DMatrix::from_row_slice(d, d, v),
            None => DMatrix::identity(d, d),
        };
        MarketModel::new(
            DVector::from_vec(self.model.sigma_bar.clone()),
            DMatrix::from_row_slice(n, n, &self.model.eta_bar),
            rho,
            DVector::from_vec(self.model.delta.clone()),
            DVector::from_vec(self.model.beta.clone()),
            varrho,
            self.model.lambda,
        )
    }

    /// Build the time grid.
    pub fn build_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.t_end, self.grid.steps)
    }
}

/// Per-strategy outcome over all outer paths.
#[derive(Debug, Clone)]
pub struct StrategyResult {
    pub strategy: StrategyKind,
    /// Per-path discretized costs, in path order.
    pub costs: Vec<f64>,
    pub aggregate: Aggregate,
    /// 100·(mean/mean_oracle − 1); present when the oracle ran.
    pub pct_excess_vs_oracle: Option<f64>,
}

/// Leading table columns shared by every row of a run.
#[derive(Debug, Clone, Copy)]
pub struct RowMeta {
    /// First asset's mean volatility.
    pub sigma_bar: f64,
    /// Last diagonal entry of the mean impact matrix.
    pub eta_bar: f64,
    pub lambda: f64,
    /// Leading off-diagonal correlation: the driver correlation ϱ₁₂ for
    /// single-asset models, the asset correlation ρ₁₂ otherwise.
    pub rho: f64,
}

/// Everything a benchmark run produces.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub results: Vec<StrategyResult>,
    pub row_meta: RowMeta,
    /// max |λ Ξ̄⁻¹ Σ̄| over entries, at mean coefficient levels.
    pub diag_max: f64,
    /// Impact-matrix eigenvalue projections over all sampled states.
    pub impact_projections: usize,
    /// Oracle solves that needed the elimination fallback.
    pub oracle_fallbacks: usize,
    pub elapsed_seconds: f64,
}

/// Largest absolute entry of λ·Ξ̄⁻¹Σ̄ at mean coefficient levels — the
/// size of the generator driving schedule curvature.
pub fn diag_max(model: &MarketModel) -> f64 {
    let st = model.mean_state();
    let a = solve_product(st.impact.as_matrix(), st.covariance.as_matrix(), model.lambda());
    a.amax()
}

fn solve_product(xi: &DMatrix<f64>, sigma: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let chol = xi
        .clone()
        .cholesky()
        .expect("mean impact is positive definite by model validation");
    chol.solve(sigma) * lambda
}

struct PathRecord {
    costs: Vec<f64>,
    projections: usize,
    fallbacks: usize,
}

/// Run the configured benchmark: common outer paths, per-path strategy
/// schedules, left-point costs, aggregation, and the oracle-dominance check.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    config.validate()?;
    let model = config.build_model()?;
    let grid = config.build_grid()?;
    let x0 = DVector::from_vec(config.x0.clone());
    let kinds = config.strategies.clone();
    let master = config.master_seed;
    let sampler = config.inner.sampler;
    let scenarios = config.inner.scenarios;
    let d = model.driver_count();
    let zero_xi = DVector::zeros(d);

    let records: Vec<PathRecord> = (0..config.outer_paths)
        .into_par_iter()
        .map(|idx| -> Result<PathRecord> {
            let outer_seed = derive_seed(master, &[stream::OUTER_DRIVERS, idx as u64]);
            let path = sample_paths(
                &model,
                &grid,
                &zero_xi,
                0,
                grid.steps,
                1,
                NoiseSource::Seeded(outer_seed),
            )?
            .remove(0);
            let tag = match sampler {
                SamplerKind::Pseudo => stream::INNER_SEED,
                SamplerKind::Sobol => stream::INNER_SHIFT,
            };
            let inner = InnerNoise {
                sampler,
                scenarios,
                base_seed: derive_seed(master, &[tag, idx as u64]),
            };
            let mut costs = Vec::with_capacity(kinds.len());
            let mut fallbacks = 0usize;
            for kind in &kinds {
                let sched = match kind {
                    StrategyKind::Oracle => {
                        let (s, diag) = discrete_optimal(&x0, &path, &grid, model.lambda())?;
                        if diag.used_fallback {
                            fallbacks += 1;
                        }
                        s
                    }
                    other => run_strategy(*other, &x0, &path, &model, &grid, &inner)?,
                };
                costs.push(path_cost(&sched, &path, model.lambda())?.total);
            }
            Ok(PathRecord {
                costs,
                projections: path.projection_count(),
                fallbacks,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // Per-path oracle dominance: no strategy may beat the a-posteriori
    // optimum beyond numerical slack.
    let oracle_idx = kinds.iter().position(|k| *k == StrategyKind::Oracle);
    if let Some(oi) = oracle_idx {
        for (p, rec) in records.iter().enumerate() {
            let oc = rec.costs[oi];
            for (ki, kind) in kinds.iter().enumerate() {
                if ki == oi {
                    continue;
                }
                let rel = rec.costs[ki] / oc - 1.0;
                if rel < DOMINANCE_FLOOR {
                    return Err(Error::Numerical(format!(
                        "{kind} beat the oracle on path {p} by relative {rel:.3e}"
                    )));
                }
            }
        }
    }

    let oracle_mean = oracle_idx.map(|oi| {
        let costs: Vec<f64> = records.iter().map(|r| r.costs[oi]).collect();
        costs.iter().sum::<f64>() / costs.len() as f64
    });
    let mut results = Vec::with_capacity(kinds.len());
    for (ki, kind) in kinds.iter().enumerate() {
        let costs: Vec<f64> = records.iter().map(|r| r.costs[ki]).collect();
        let agg = aggregate(&costs)?;
        let pct = oracle_mean.map(|om| 100.0 * (agg.mean / om - 1.0));
        results.push(StrategyResult {
            strategy: *kind,
            costs,
            aggregate: agg,
            pct_excess_vs_oracle: pct,
        });
    }

    let n = model.asset_count();
    let row_meta = RowMeta {
        sigma_bar: model.sigma_bar()[0],
        eta_bar: model.eta_bar()[(n - 1, n - 1)],
        lambda: model.lambda(),
        rho: if n == 1 {
            model.varrho()[(0, 1)]
        } else {
            model.rho()[(0, 1)]
        },
    };
    Ok(ExperimentOutcome {
        config: config.clone(),
        results,
        row_meta,
        diag_max: diag_max(&model),
        impact_projections: records.iter().map(|r| r.projections).sum(),
        oracle_fallbacks: records.iter().map(|r| r.fallbacks).sum(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One row of the scenario-count convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub scenario_count: usize,
    pub sampler: SamplerKind,
    /// Index of the fixed outer path this row refers to.
    pub state_index: usize,
    /// Strategy cost per repeat (fresh seed or fresh digital shift).
    pub costs: Vec<f64>,
    /// max − min over the repeats.
    pub spread: f64,
}

/// Estimator-noise study: on `states` fixed outer paths, rerun one Monte
/// Carlo strategy with `repeats` independent inner streams for each scenario
/// count and both sampler kinds, recording the spread of the resulting total
/// cost. Low-discrepancy scenarios should show systematically smaller
/// spreads at equal N.
pub fn convergence_study(
    config: &ExperimentConfig,
    kind: StrategyKind,
    n_list: &[usize],
    repeats: usize,
    states: usize,
) -> Result<Vec<ConvergenceRow>> {
    if !matches!(kind, StrategyKind::RhmcI | StrategyKind::RhmcII) {
        return Err(Error::Config(
            "the convergence study applies to the Monte Carlo strategies".into(),
        ));
    }
    if n_list.is_empty() || repeats == 0 || states == 0 {
        return Err(Error::Config(
            "convergence study needs scenario counts, repeats, and states".into(),
        ));
    }
    config.validate()?;
    let model = config.build_model()?;
    let grid = config.build_grid()?;
    let x0 = DVector::from_vec(config.x0.clone());
    let master = config.master_seed;
    let d = model.driver_count();
    let zero_xi = DVector::zeros(d);

    let mut jobs = Vec::new();
    for state_index in 0..states {
        for &scenario_count in n_list {
            for sampler in [SamplerKind::Sobol, SamplerKind::Pseudo] {
                jobs.push((state_index, scenario_count, sampler));
            }
        }
    }
    let rows: Vec<ConvergenceRow> = jobs
        .into_par_iter()
        .map(|(state_index, scenario_count, sampler)| -> Result<ConvergenceRow> {
            let outer_seed = derive_seed(master, &[stream::OUTER_DRIVERS, state_index as u64]);
            let path = sample_paths(
                &model,
                &grid,
                &zero_xi,
                0,
                grid.steps,
                1,
                NoiseSource::Seeded(outer_seed),
            )?
            .remove(0);
            let tag = match sampler {
                SamplerKind::Pseudo => stream::INNER_SEED,
                SamplerKind::Sobol => stream::INNER_SHIFT,
            };
            let mut costs = Vec::with_capacity(repeats);
            for rep in 0..repeats {
                let inner = InnerNoise {
                    sampler,
                    scenarios: scenario_count,
                    base_seed: derive_seed(master, &[tag, state_index as u64, rep as u64]),
                };
                let sched = run_strategy(kind, &x0, &path, &model, &grid, &inner)?;
                costs.push(path_cost(&sched, &path, model.lambda())?.total);
            }
            let spread = costs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - costs.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(ConvergenceRow {
                scenario_count,
                sampler,
                state_index,
                costs,
                spread,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows)
}

fn sampler_label(kind: SamplerKind) -> &'static str {
    match kind {
        SamplerKind::Pseudo => "mc",
        SamplerKind::Sobol => "qmc",
    }
}

/// Write `results.csv`, `results.json`, and `meta.json` into `dir`
/// (created if missing). `results.csv` and `results.json` are byte-identical
/// across reruns of the same configuration and seed.
pub fn write_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_results_csv(outcome, &dir.join("results.csv"))?;
    write_results_json(outcome, &dir.join("results.json"))?;
    write_meta_json(outcome, &dir.join("meta.json"))?;
    Ok(())
}

fn write_results_csv(outcome: &ExperimentOutcome, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([
        "sigma_bar",
        "eta_bar",
        "lambda",
        "rho",
        "strategy",
        "mean_cost",
        "stderr",
        "pct_excess_vs_oracle",
        "diag_max",
    ])
    .map_err(csv_err)?;
    let m = &outcome.row_meta;
    for res in &outcome.results {
        w.write_record([
            m.sigma_bar.to_string(),
            m.eta_bar.to_string(),
            m.lambda.to_string(),
            m.rho.to_string(),
            res.strategy.label().to_string(),
            res.aggregate.mean.to_string(),
            res.aggregate.stderr.to_string(),
            res.pct_excess_vs_oracle
                .map(|p| p.to_string())
                .unwrap_or_default(),
            outcome.diag_max.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Write convergence-study rows as CSV.
pub fn write_convergence_csv(rows: &[ConvergenceRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["n", "sampler", "state", "repeats", "mean_cost", "min", "max", "spread"])
        .map_err(csv_err)?;
    for row in rows {
        let agg = aggregate(&row.costs)?;
        w.write_record([
            row.scenario_count.to_string(),
            sampler_label(row.sampler).to_string(),
            row.state_index.to_string(),
            row.costs.len().to_string(),
            agg.mean.to_string(),
            agg.min.to_string(),
            agg.max.to_string(),
            row.spread.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Numerical(format!("csv output failed: {e}"))
}

#[derive(Serialize)]
struct StrategyJson<'a> {
    strategy: &'a str,
    mean_cost: f64,
    stderr: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pct_excess_vs_oracle: Option<f64>,
    costs: &'a [f64],
}

#[derive(Serialize)]
struct ResultsJson<'a> {
    paths: usize,
    strategies: Vec<StrategyJson<'a>>,
}

fn write_results_json(outcome: &ExperimentOutcome, path: &Path) -> Result<()> {
    let doc = ResultsJson {
        paths: outcome.config.outer_paths,
        strategies: outcome
            .results
            .iter()
            .map(|r| StrategyJson {
                strategy: r.strategy.label(),
                mean_cost: r.aggregate.mean,
                stderr: r.aggregate.stderr,
                pct_excess_vs_oracle: r.pct_excess_vs_oracle,
                costs: &r.costs,
            })
            .collect(),
    };
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    Ok(())
}

#[derive(Serialize)]
struct MetaJson {
    master_seed: u64,
    t_horizon: f64,
    steps: usize,
    outer_paths: usize,
    sampler: String,
    inner_scenarios: usize,
    crate_version: String,
    elapsed_seconds: f64,
    impact_projections: usize,
    oracle_fallbacks: usize,
    threads: usize,
}

fn write_meta_json(outcome: &ExperimentOutcome, path: &Path) -> Result<()> {
    let doc = MetaJson {
        master_seed: outcome.config.master_seed,
        t_horizon: outcome.config.grid.t_end,
        steps: outcome.config.grid.steps,
        outer_paths: outcome.config.outer_paths,
        sampler: sampler_label(outcome.config.inner.sampler).to_string(),
        inner_scenarios: outcome.config.inner.scenarios,
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        elapsed_seconds: outcome.elapsed_seconds,
        impact_projections: outcome.impact_projections,
        oracle_fallbacks: outcome.oracle_fallbacks,
        threads: rayon::current_num_threads(),
    };
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    Ok(())
}
