//! Execution strategies on the decision grid.
//!
//! All strategies produce a [`Schedule`]: inventory rows x_0..x_M with
//! x_0 = initial position and x_M = 0 (full liquidation).
//!
//! * [`cc_schedule`] — certainty-equivalent closed form: freeze coefficients
//!   at their step-0 values and follow the deterministic optimal trajectory
//!   x(t) = Ω(t)x₀ for the whole horizon.
//! * RHS ([`rhs_step`]) — rolling horizon: at each step rebuild the closed
//!   form from the currently observed coefficients and remaining horizon, and
//!   apply it for one step.
//! * RHMC ([`rhmc_abar_one`], [`rhmc_abar_two`], [`rhmc_step`]) — rolling
//!   horizon Monte Carlo: at each step estimate the expected continuation
//!   cost matrix Ā from simulated coefficient scenarios, then take the one
//!   step that is optimal against it:
//!   (Ξ(t_k) + Ā Δt²) x_{k+1} = Ξ(t_k) x_k.
//!
//! Every strategy is causal: the decision at step k reads the outer path only
//! through step k (plus its own scenario noise), never the future.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::grid::TimeGrid;
use crate::market::{sample_paths, MarketModel, MarketPath, MarketState, NoiseSource};
use crate::noise::{derive_seed, NoiseSpec, SamplerKind};
use crate::propagator::{omega_prime_scalar, omega_scalar, PropagatorBasis};
use crate::{Error, Result};

/// A complete execution schedule: inventory x_k at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    inventory: DMatrix<f64>,
    t_end: f64,
}

impl Schedule {
    /// Wrap an (M+1)×n inventory matrix over horizon `t_end`.
    pub fn from_inventory(inventory: DMatrix<f64>, t_end: f64) -> Result<Self> {
        if inventory.nrows() < 2 {
            return Err(Error::Config(
                "schedule needs at least one trading step".into(),
            ));
        }
        if !(t_end.is_finite() && t_end > 0.0) {
            return Err(Error::Config(format!(
                "schedule horizon must be positive, got {t_end}"
            )));
        }
        if inventory.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("schedule contains non-finite inventory".into()));
        }
        Ok(Schedule { inventory, t_end })
    }

    /// Number of trading steps M.
    pub fn steps(&self) -> usize {
        self.inventory.nrows() - 1
    }

    /// Number of assets n.
    pub fn assets(&self) -> usize {
        self.inventory.ncols()
    }

    /// Horizon T.
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Step width Δt.
    pub fn dt(&self) -> f64 {
        self.t_end / self.steps() as f64
    }

    /// Full (M+1)×n inventory matrix.
    pub fn inventory(&self) -> &DMatrix<f64> {
        &self.inventory
    }

    /// Inventory x_k as a column vector.
    pub fn position(&self, k: usize) -> DVector<f64> {
        self.inventory.row(k).transpose()
    }

    /// Trading rate over step k: v_k = (x_{k+1} − x_k)/Δt.
    pub fn velocity(&self, k: usize) -> DVector<f64> {
        (self.inventory.row(k + 1) - self.inventory.row(k)).transpose() / self.dt()
    }

    /// Largest absolute inventory left at the final node (0 for a
    /// well-formed liquidation schedule).
    pub fn terminal_error(&self) -> f64 {
        self.inventory.row(self.steps()).amax()
    }
}

/// Strategy selector, including the non-causal a-posteriori benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Certainty-equivalent closed form from step-0 coefficients.
    #[serde(rename = "CC")]
    Cc,
    /// Rolling horizon strategy (re-solved closed form each step).
    #[serde(rename = "RHS")]
    Rhs,
    /// Rolling horizon Monte Carlo, propagated-schedule continuation value.
    #[serde(rename = "RHMC_I")]
    RhmcI,
    /// Rolling horizon Monte Carlo, frozen-basis continuation value.
    #[serde(rename = "RHMC_II")]
    RhmcII,
    /// A-posteriori discrete optimum (sees the whole path; benchmark only).
    #[serde(rename = "ORACLE")]
    Oracle,
}

impl StrategyKind {
    /// Label used in result tables.
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Cc => "CC",
            StrategyKind::Rhs => "RHS",
            StrategyKind::RhmcI => "RHMC_I",
            StrategyKind::RhmcII => "RHMC_II",
            StrategyKind::Oracle => "ORACLE",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Scenario noise configuration for the Monte Carlo strategies.
///
/// At decision step k the strategy draws `scenarios` coefficient paths over
/// the remaining steps, using a per-step stream derived as
/// `derive_seed(base_seed, [k])` — a pseudo-random seed for `mc`, a digital
/// shift for `qmc`.
#[derive(Debug, Clone, Copy)]
pub struct InnerNoise {
    pub sampler: SamplerKind,
    pub scenarios: usize,
    pub base_seed: u64,
}

/// Expected continuation cost matrix estimated at one decision step.
#[derive(Debug, Clone)]
pub struct ContinuationMatrix {
    /// Symmetric positive semidefinite n×n matrix Ā.
    pub matrix: DMatrix<f64>,
    /// Scenarios averaged.
    pub scenarios: usize,
}

/// Closed-form schedule with coefficients frozen at `state0`:
/// x_k = Ω(t_k, T) x₀. The final node is exactly zero.
pub fn cc_schedule(
    x0: &DVector<f64>,
    grid: &TimeGrid,
    state0: &MarketState,
    lambda: f64,
) -> Result<Schedule> {
    let n = x0.len();
    let basis = PropagatorBasis::new(&state0.impact, &state0.covariance, lambda, grid.t_end)?;
    if basis.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "cc_schedule initial position",
            expected: basis.dim(),
            got: n,
        });
    }
    let m_steps = grid.steps;
    let mut inventory = DMatrix::zeros(m_steps + 1, n);
    let mut om = DMatrix::zeros(n, n);
    for k in 0..=m_steps {
        basis.omega_into(grid.t(k), &mut om)?;
        let xk = &om * x0;
        for c in 0..n {
            inventory[(k, c)] = xk[c];
        }
    }
    Schedule::from_inventory(inventory, grid.t_end)
}

/// One rolling-horizon step: rebuild the closed form from the currently
/// observed coefficients over the remaining horizon and advance one step,
/// x_{k+1} = Ω(Δt, T − t_k) x_k. At the final step (k = M−1) the evaluation
/// point coincides with the remaining horizon, so the result is exactly zero.
pub fn rhs_step(
    x: &DVector<f64>,
    k: usize,
    grid: &TimeGrid,
    state: &MarketState,
    lambda: f64,
) -> Result<DVector<f64>> {
    let tau = grid.remaining(k);
    let basis = PropagatorBasis::new(&state.impact, &state.covariance, lambda, tau)?;
    let s = if k + 1 == grid.steps {
        tau
    } else {
        grid.dt().min(tau)
    };
    let mut om = DMatrix::zeros(x.len(), x.len());
    basis.omega_into(s, &mut om)?;
    Ok(&om * x)
}

/// Propagated-schedule continuation value at decision step k.
///
/// Each scenario replays the rolling closed form along its own simulated
/// coefficients: with V₀ = I and Ω_ℓ the one-step propagator at step k+ℓ
/// (horizon T − t_{k+ℓ}), accumulate
///
/// ```text
///   A += Vᵀ [ Dᵀ Ξ(t_{k+ℓ}) D + λ Σ(t_{k+ℓ}) ] V,   D = (Ω_ℓ − I)/Δt,
/// ```
///
/// then advance V ← Ω_ℓ V; Ā is the scenario average, symmetrized.
pub fn rhmc_abar_one(
    k: usize,
    grid: &TimeGrid,
    scenarios: &[MarketPath],
    lambda: f64,
) -> Result<ContinuationMatrix> {
    let m_steps = grid.steps;
    if k + 1 >= m_steps {
        return Err(Error::Config(
            "continuation value undefined at the final step".into(),
        ));
    }
    if scenarios.is_empty() {
        return Err(Error::Config("continuation value needs scenarios".into()));
    }
    let n = scenarios[0].state(k).impact.dim();
    let dt = grid.dt();
    let horizon_steps = m_steps - 1 - k;

    if n == 1 {
        let mut acc = 0.0;
        for path in scenarios {
            let mut v = 1.0;
            for l in 1..=horizon_steps {
                let step = k + l;
                let st = path.state(step);
                let eta = st.impact.as_matrix()[(0, 0)];
                let sig = st.covariance.as_matrix()[(0, 0)];
                let tau = grid.remaining(step);
                let om = omega_scalar((lambda * sig / eta).sqrt(), dt.min(tau), tau);
                let dd = (om - 1.0) / dt;
                acc += v * v * (dd * dd * eta + lambda * sig);
                v *= om;
            }
        }
        return Ok(ContinuationMatrix {
            matrix: DMatrix::from_element(1, 1, acc / scenarios.len() as f64),
            scenarios: scenarios.len(),
        });
    }

    let mut acc = DMatrix::zeros(n, n);
    let mut vmat = DMatrix::zeros(n, n);
    let mut vnew = DMatrix::zeros(n, n);
    let mut om = DMatrix::zeros(n, n);
    let mut dmat = DMatrix::zeros(n, n);
    let mut term = DMatrix::zeros(n, n);
    let mut tmp = DMatrix::zeros(n, n);
    for path in scenarios {
        vmat.fill_with_identity();
        for l in 1..=horizon_steps {
            let step = k + l;
            let st = path.state(step);
            let tau = grid.remaining(step);
            let basis =
                PropagatorBasis::new(&st.impact, &st.covariance, lambda, tau)?;
            basis.omega_into(dt.min(tau), &mut om)?;
            dmat.copy_from(&om);
            for i in 0..n {
                dmat[(i, i)] -= 1.0;
            }
            dmat /= dt;
            // term = Dᵀ Ξ D + λ Σ
            tmp.gemm(1.0, st.impact.as_matrix(), &dmat, 0.0);
            term.gemm_tr(1.0, &dmat, &tmp, 0.0);
            term.zip_apply(st.covariance.as_matrix(), |t, c| *t += lambda * c);
            // acc += Vᵀ term V
            tmp.gemm(1.0, &term, &vmat, 0.0);
            acc.gemm_tr(1.0, &vmat, &tmp, 1.0);
            // V ← Ω V
            vnew.gemm(1.0, &om, &vmat, 0.0);
            std::mem::swap(&mut vmat, &mut vnew);
        }
    }
    acc /= scenarios.len() as f64;
    let sym = (&acc + acc.transpose()) * 0.5;
    Ok(ContinuationMatrix {
        matrix: sym,
        scenarios: scenarios.len(),
    })
}

/// Frozen-basis continuation value at decision step k.
///
/// Each scenario freezes the closed-form basis at its own sampled step-(k+1)
/// coefficients (horizon T − t_{k+1}) and integrates the quadratic cost along
/// it, re-weighting each term with the coefficients sampled at the step it
/// refers to:
///
/// ```text
///   A += Ω′(s_ℓ)ᵀ Ξ(t_{k+ℓ}) Ω′(s_ℓ) + λ Ω(s_ℓ)ᵀ Σ(t_{k+ℓ}) Ω(s_ℓ),
///   s_ℓ = (ℓ−1)Δt.
/// ```
pub fn rhmc_abar_two(
    k: usize,
    grid: &TimeGrid,
    scenarios: &[MarketPath],
    lambda: f64,
) -> Result<ContinuationMatrix> {
    let m_steps = grid.steps;
    if k + 1 >= m_steps {
        return Err(Error::Config(
            "continuation value undefined at the final step".into(),
        ));
    }
    if scenarios.is_empty() {
        return Err(Error::Config("continuation value needs scenarios".into()));
    }
    let n = scenarios[0].state(k).impact.dim();
    let dt = grid.dt();
    let horizon_steps = m_steps - 1 - k;

    if n == 1 {
        let mut acc = 0.0;
        for path in scenarios {
            let st1 = path.state(k + 1);
            let eta1 = st1.impact.as_matrix()[(0, 0)];
            let sig1 = st1.covariance.as_matrix()[(0, 0)];
            let tau = grid.remaining(k + 1);
            let mu = (lambda * sig1 / eta1).sqrt();
            for l in 1..=horizon_steps {
                let s = (((l - 1) as f64) * dt).min(tau);
                let om = omega_scalar(mu, s, tau);
                let omp = omega_prime_scalar(mu, s, tau);
                let st = path.state(k + l);
                let eta = st.impact.as_matrix()[(0, 0)];
                let sig = st.covariance.as_matrix()[(0, 0)];
                acc += omp * omp * eta + lambda * om * om * sig;
            }
        }
        return Ok(ContinuationMatrix {
            matrix: DMatrix::from_element(1, 1, acc / scenarios.len() as f64),
            scenarios: scenarios.len(),
        });
    }

    let mut acc = DMatrix::zeros(n, n);
    let mut om = DMatrix::zeros(n, n);
    let mut omp = DMatrix::zeros(n, n);
    let mut tmp = DMatrix::zeros(n, n);
    for path in scenarios {
        let st1 = path.state(k + 1);
        let tau = grid.remaining(k + 1);
        let basis = PropagatorBasis::new(&st1.impact, &st1.covariance, lambda, tau)?;
        for l in 1..=horizon_steps {
            let s = (((l - 1) as f64) * dt).min(tau);
            basis.omega_into(s, &mut om)?;
            basis.omega_prime_into(s, &mut omp)?;
            let st = path.state(k + l);
            tmp.gemm(1.0, st.impact.as_matrix(), &omp, 0.0);
            acc.gemm_tr(1.0, &omp, &tmp, 1.0);
            tmp.gemm(1.0, st.covariance.as_matrix(), &om, 0.0);
            acc.gemm_tr(lambda, &om, &tmp, 1.0);
        }
    }
    acc /= scenarios.len() as f64;
    let sym = (&acc + acc.transpose()) * 0.5;
    Ok(ContinuationMatrix {
        matrix: sym,
        scenarios: scenarios.len(),
    })
}

/// One Monte Carlo strategy step: the minimizer of the one-step cost plus
/// the quadratic continuation value,
/// (Ξ(t_k) + Ā Δt²) x_{k+1} = Ξ(t_k) x_k.
pub fn rhmc_step(
    x: &DVector<f64>,
    state: &MarketState,
    abar: &DMatrix<f64>,
    dt: f64,
) -> Result<DVector<f64>> {
    let n = x.len();
    if abar.nrows() != n || abar.ncols() != n || state.impact.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "rhmc_step",
            expected: n,
            got: abar.nrows().max(state.impact.dim()),
        });
    }
    let mut lhs = state.impact.as_matrix().clone();
    lhs.zip_apply(abar, |l, a| *l += dt * dt * a);
    let chol = lhs
        .cholesky()
        .ok_or_else(|| Error::Numerical("one-step system lost positive definiteness".into()))?;
    let rhs = state.impact.as_matrix() * x;
    Ok(chol.solve(&rhs))
}

/// Run a strategy along an outer coefficient path covering steps 0..=M−1
/// (at least). `inner` configures scenario noise for the Monte Carlo
/// strategies and is ignored by the others. The oracle variant delegates to
/// the a-posteriori solver and is the only one that reads the whole path.
pub fn run_strategy(
    kind: StrategyKind,
    x0: &DVector<f64>,
    path: &MarketPath,
    model: &MarketModel,
    grid: &TimeGrid,
    inner: &InnerNoise,
) -> Result<Schedule> {
    let m_steps = grid.steps;
    if path.start_step != 0 || path.end_step() + 1 < m_steps {
        return Err(Error::Config(
            "strategy needs an outer path covering steps 0..=M-1".into(),
        ));
    }
    if x0.len() != model.asset_count() {
        return Err(Error::DimensionMismatch {
            context: "run_strategy initial position",
            expected: model.asset_count(),
            got: x0.len(),
        });
    }
    let lambda = model.lambda();
    match kind {
        StrategyKind::Cc => cc_schedule(x0, grid, path.state(0), lambda),
        StrategyKind::Rhs => {
            let n = x0.len();
            let mut inventory = DMatrix::zeros(m_steps + 1, n);
            let mut x = x0.clone();
            set_row(&mut inventory, 0, &x);
            for k in 0..m_steps {
                x = rhs_step(&x, k, grid, path.state(k), lambda)?;
                set_row(&mut inventory, k + 1, &x);
            }
            Schedule::from_inventory(inventory, grid.t_end)
        }
        StrategyKind::RhmcI | StrategyKind::RhmcII => {
            rhmc_schedule(kind, x0, path, model, grid, inner)
        }
        StrategyKind::Oracle => {
            crate::oracle::discrete_optimal(x0, path, grid, lambda).map(|(s, _)| s)
        }
    }
}

fn rhmc_schedule(
    kind: StrategyKind,
    x0: &DVector<f64>,
    path: &MarketPath,
    model: &MarketModel,
    grid: &TimeGrid,
    inner: &InnerNoise,
) -> Result<Schedule> {
    if inner.scenarios == 0 {
        return Err(Error::Config(
            "Monte Carlo strategies need at least one scenario".into(),
        ));
    }
    let m_steps = grid.steps;
    let n = x0.len();
    let d = model.driver_count();
    let dt = grid.dt();
    let mut inventory = DMatrix::zeros(m_steps + 1, n);
    let mut x = x0.clone();
    set_row(&mut inventory, 0, &x);
    for k in 0..m_steps {
        if k + 1 == m_steps {
            // Terminal step: liquidate the remainder exactly.
            x = DVector::zeros(n);
            set_row(&mut inventory, k + 1, &x);
            break;
        }
        let spec = NoiseSpec {
            kind: inner.sampler,
            dimension: (m_steps - 1 - k) * d,
            count: inner.scenarios,
            seed: derive_seed(inner.base_seed, &[k as u64]),
        };
        let normals = spec.normals()?;
        let scenarios = sample_paths(
            model,
            grid,
            path.xi_at(k),
            k,
            m_steps - 1,
            inner.scenarios,
            NoiseSource::Block(&normals),
        )?;
        let abar = match kind {
            StrategyKind::RhmcI => rhmc_abar_one(k, grid, &scenarios, model.lambda())?,
            StrategyKind::RhmcII => rhmc_abar_two(k, grid, &scenarios, model.lambda())?,
            _ => unreachable!("rhmc_schedule only handles Monte Carlo strategies"),
        };
        x = rhmc_step(&x, path.state(k), &abar.matrix, dt)?;
        set_row(&mut inventory, k + 1, &x);
    }
    Schedule::from_inventory(inventory, grid.t_end)
}

fn set_row(inventory: &mut DMatrix<f64>, k: usize, x: &DVector<f64>) {
    for c in 0..x.len() {
        inventory[(k, c)] = x[c];
    }
}
