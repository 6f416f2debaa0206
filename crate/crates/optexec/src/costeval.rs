//! Discretized cost evaluation and aggregation.
//!
//! All strategies and the oracle are scored under one shared objective, the
//! left-point discretization of the mean-variance cost:
//!
//! ```text
//!   total = Δt Σ_{k=0}^{M−1} [ v_kᵀ Ξ(t_k) v_k + λ x_kᵀ Σ(t_k) x_k ].
//! ```
//!
//! [`realized_cost`] additionally scores a schedule against one simulated
//! price path: the martingale term Σ x_kᵀΔS_k has zero mean, so realized
//! costs scatter around the impact term with variance Δt Σ x_kᵀΣ(t_k)x_k.

use nalgebra::DMatrix;

use crate::market::MarketPath;
use crate::strategies::Schedule;
use crate::{Error, Result};

/// Decomposed discretized cost of one schedule on one path.
#[derive(Debug, Clone)]
pub struct CostReport {
    /// impact_term + risk_term.
    pub total: f64,
    /// Δt Σ v_kᵀΞ(t_k)v_k.
    pub impact_term: f64,
    /// λΔt Σ x_kᵀΣ(t_k)x_k.
    pub risk_term: f64,
    /// Per-step contributions; sums to `total`.
    pub per_step: Vec<f64>,
}

/// Sample statistics over per-path costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    /// Standard error of the mean (sample standard deviation / √count).
    pub stderr: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

/// Left-point discretized mean-variance cost of `schedule` on `path`.
pub fn path_cost(schedule: &Schedule, path: &MarketPath, lambda: f64) -> Result<CostReport> {
    let m_steps = schedule.steps();
    let n = schedule.assets();
    if path.start_step != 0 || path.end_step() + 1 < m_steps {
        return Err(Error::Config(
            "cost evaluation needs a path covering steps 0..=M-1".into(),
        ));
    }
    if path.state(0).impact.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "path_cost assets",
            expected: path.state(0).impact.dim(),
            got: n,
        });
    }
    let dt = schedule.dt();
    let mut impact_term = 0.0;
    let mut risk_term = 0.0;
    let mut per_step = Vec::with_capacity(m_steps);
    for k in 0..m_steps {
        let v = schedule.velocity(k);
        let x = schedule.position(k);
        let st = path.state(k);
        let imp = dt * (v.transpose() * st.impact.as_matrix() * &v)[(0, 0)];
        let rsk = lambda * dt * (x.transpose() * st.covariance.as_matrix() * &x)[(0, 0)];
        impact_term += imp;
        risk_term += rsk;
        per_step.push(imp + rsk);
    }
    Ok(CostReport {
        total: impact_term + risk_term,
        impact_term,
        risk_term,
        per_step,
    })
}

/// Realized slippage of `schedule` against one simulated price path:
/// Σ_k x_kᵀΔS_k + Δt Σ_k v_kᵀΞ(t_k)v_k (left-point in both sums).
pub fn realized_cost(
    schedule: &Schedule,
    path: &MarketPath,
    price_increments: &DMatrix<f64>,
) -> Result<f64> {
    let m_steps = schedule.steps();
    let n = schedule.assets();
    if price_increments.nrows() < m_steps || price_increments.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "realized_cost price increments",
            expected: m_steps * n,
            got: price_increments.nrows() * price_increments.ncols(),
        });
    }
    let report = path_cost(schedule, path, 0.0)?;
    let mut martingale = 0.0;
    for k in 0..m_steps {
        let x = schedule.position(k);
        for c in 0..n {
            martingale += x[c] * price_increments[(k, c)];
        }
    }
    Ok(martingale + report.impact_term)
}

/// Ordered sample statistics (deterministic summation order).
pub fn aggregate(costs: &[f64]) -> Result<Aggregate> {
    if costs.is_empty() {
        return Err(Error::Config("cannot aggregate an empty cost list".into()));
    }
    let count = costs.len();
    let mut sum = 0.0;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &c in costs {
        sum += c;
        min = min.min(c);
        max = max.max(c);
    }
    let mean = sum / count as f64;
    let stderr = if count < 2 {
        0.0
    } else {
        let mut ss = 0.0;
        for &c in costs {
            ss += (c - mean) * (c - mean);
        }
        (ss / ((count - 1) as f64)).sqrt() / (count as f64).sqrt()
    };
    Ok(Aggregate {
        mean,
        stderr,
        min,
        max,
        count,
    })
}
