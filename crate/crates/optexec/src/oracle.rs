//! Ground-truth references.
//!
//! * [`discrete_optimal`] — the a-posteriori optimal schedule: with the whole
//!   coefficient path known, the discretized cost is a positive definite
//!   quadratic in the velocity vector, minimized under the full-liquidation
//!   constraint by one equality-constrained QP solve. Non-causal by design:
//!   no trader can follow it, but every causal strategy can be measured
//!   against it path by path.
//! * [`rhs_residual`] — the drift residual that decides whether re-solving
//!   the frozen-coefficient closed form each instant is itself dynamically
//!   optimal; it vanishes identically under coordinated variation.
//!
//! Velocity layout is asset-major: slot i·M + k holds asset i's velocity
//! over step k. With R_k = Σ_{m≥k} v_m and x_k = −Δt R_k (full liquidation
//! folds the initial position into the constraint), the discrete cost is
//! exactly vᵀHv with
//!
//! ```text
//!   H[(i,k),(j,ℓ)] = Δt·Ξ_ij(t_k)·1{k=ℓ} + λΔt³·Σ_{m≤min(k,ℓ)} Σ_ij(t_m),
//! ```
//!
//! and the constraint rows are W[i, (i,k)] = −Δt, W v = x₀.

use nalgebra::{DMatrix, DVector};

use crate::grid::TimeGrid;
use crate::market::{MarketModel, MarketPath};
use crate::strategies::Schedule;
use crate::{Error, Result};

/// Acceptable relative residual of the stationarity equation.
const KKT_RTOL: f64 = 1e-8;
/// Acceptable relative residual of the liquidation constraint.
const CONSTRAINT_RTOL: f64 = 1e-10;

/// Assembled equality-constrained quadratic program.
#[derive(Debug, Clone)]
pub struct QPSystem {
    /// (M·n)×(M·n) symmetric positive definite cost matrix.
    pub hessian: DMatrix<f64>,
    /// n×(M·n) constraint matrix (full row rank).
    pub constraints: DMatrix<f64>,
    /// Right-hand side: the initial inventory.
    pub targets: DVector<f64>,
}

/// Solve quality report for one oracle solve.
#[derive(Debug, Clone, Copy)]
pub struct OracleDiagnostics {
    /// ‖2Hv + Wᵀμ‖ / max(‖2Hv‖, ‖Wᵀμ‖).
    pub kkt_residual: f64,
    /// ‖Wv − x₀‖ / ‖x₀‖.
    pub constraint_residual: f64,
    /// Minimized objective vᵀHv (equals the schedule's discretized cost).
    pub objective: f64,
    /// Whether the bordered solve was replaced by constraint elimination.
    pub used_fallback: bool,
}

/// Build the QP for a path covering steps 0..=M−1 (at least).
pub fn qp_system(
    x0: &DVector<f64>,
    path: &MarketPath,
    grid: &TimeGrid,
    lambda: f64,
) -> Result<QPSystem> {
    let m_steps = grid.steps;
    if path.start_step != 0 || path.end_step() + 1 < m_steps {
        return Err(Error::Config(
            "oracle needs a path covering steps 0..=M-1".into(),
        ));
    }
    let n = path.state(0).impact.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch {
            context: "qp_system initial position",
            expected: n,
            got: x0.len(),
        });
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Config(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let dt = grid.dt();
    let dim = m_steps * n;
    let mut h = DMatrix::zeros(dim, dim);
    // Impact part: block-diagonal in time.
    for k in 0..m_steps {
        let xi = path.state(k).impact.as_matrix();
        for i in 0..n {
            for j in 0..n {
                h[(i * m_steps + k, j * m_steps + k)] += dt * xi[(i, j)];
            }
        }
    }
    // Risk part: running sums of the covariance, entering at min(k, ℓ).
    let mut prefix = Vec::with_capacity(m_steps);
    let mut run = DMatrix::zeros(n, n);
    for k in 0..m_steps {
        run += path.state(k).covariance.as_matrix();
        prefix.push(run.clone());
    }
    let c = lambda * dt * dt * dt;
    if c != 0.0 {
        for i in 0..n {
            for j in 0..n {
                for k in 0..m_steps {
                    for l in 0..m_steps {
                        h[(i * m_steps + k, j * m_steps + l)] += c * prefix[k.min(l)][(i, j)];
                    }
                }
            }
        }
    }
    let mut w = DMatrix::zeros(n, dim);
    for i in 0..n {
        for k in 0..m_steps {
            w[(i, i * m_steps + k)] = -dt;
        }
    }
    Ok(QPSystem {
        hessian: h,
        constraints: w,
        targets: x0.clone(),
    })
}

/// A-posteriori optimal schedule on one fully observed path.
///
/// Solves the bordered stationarity system
/// `[2H Wᵀ; W 0][v; μ] = [0; x₀]` by LU factorization, verifies the
/// stationarity and constraint residuals, and falls back to constraint
/// elimination with a Cholesky solve if the bordered solve fails or is out
/// of tolerance. The schedule is reconstructed from velocity suffix sums, so
/// the final inventory is exactly zero.
pub fn discrete_optimal(
    x0: &DVector<f64>,
    path: &MarketPath,
    grid: &TimeGrid,
    lambda: f64,
) -> Result<(Schedule, OracleDiagnostics)> {
    let qp = qp_system(x0, path, grid, lambda)?;
    let dim = qp.hessian.nrows();
    let n = qp.targets.len();
    let mut used_fallback = false;
    let mut v = solve_bordered(&qp);
    if let Some(ref cand) = v {
        let (r_kkt, r_con) = residuals(&qp, cand);
        if !(r_kkt <= KKT_RTOL && r_con <= CONSTRAINT_RTOL) {
            v = None;
        }
    }
    if v.is_none() {
        used_fallback = true;
        v = Some(solve_by_elimination(&qp)?);
    }
    let v = v.expect("a solve path produced a candidate");
    let (kkt_residual, constraint_residual) = residuals(&qp, &v);
    if !(kkt_residual <= KKT_RTOL && constraint_residual <= CONSTRAINT_RTOL) {
        return Err(Error::Numerical(format!(
            "oracle residuals out of tolerance: stationarity {kkt_residual:.3e}, \
             constraint {constraint_residual:.3e}"
        )));
    }
    let objective = (v.transpose() * &qp.hessian * &v)[(0, 0)];
    debug_assert_eq!(dim % n, 0);
    let m_steps = dim / n;
    let dt = grid.dt();
    // x_k = −Δt Σ_{m≥k} v_m per asset; suffix accumulation makes x_M = 0
    // exact and x_0 equal to the initial inventory up to solver precision.
    let mut inventory = DMatrix::zeros(m_steps + 1, n);
    for i in 0..n {
        let mut suffix = 0.0;
        for k in (0..m_steps).rev() {
            suffix += v[i * m_steps + k];
            inventory[(k, i)] = -dt * suffix;
        }
    }
    let schedule = Schedule::from_inventory(inventory, grid.t_end)?;
    Ok((
        schedule,
        OracleDiagnostics {
            kkt_residual,
            constraint_residual,
            objective,
            used_fallback,
        },
    ))
}

/// Reference solve by explicit constraint elimination: one velocity per
/// asset is expressed through the others, the reduced unconstrained system
/// is solved by Cholesky. Used as an independent cross-check of the
/// bordered solve (and as its fallback).
pub fn solve_by_elimination(qp: &QPSystem) -> Result<DVector<f64>> {
    let dim = qp.hessian.nrows();
    let n = qp.targets.len();
    let m_steps = dim / n;
    let dt = -qp.constraints[(0, 0)];
    if m_steps < 2 {
        // Single step: v is fully determined by the constraint.
        let mut v = DVector::zeros(dim);
        for i in 0..n {
            v[i] = -qp.targets[i] / dt;
        }
        return Ok(v);
    }
    let red = (m_steps - 1) * n;
    // Particular solution: all inventory carried by the last slot.
    let mut part = DVector::zeros(dim);
    for i in 0..n {
        part[i * m_steps + m_steps - 1] = -qp.targets[i] / dt;
    }
    let hp = &qp.hessian * &part;
    let full = |i: usize, k: usize| i * m_steps + k;
    let reduced = |i: usize, k: usize| i * (m_steps - 1) + k;
    // Null-space basis columns are e_(i,k) − e_(i,M−1); assemble ZᵀHZ and
    // −ZᵀHp directly from index arithmetic.
    let mut r = DMatrix::zeros(red, red);
    let mut rhs = DVector::zeros(red);
    for i in 0..n {
        for k in 0..m_steps - 1 {
            let row = reduced(i, k);
            rhs[row] = -(hp[full(i, k)] - hp[full(i, m_steps - 1)]);
            for j in 0..n {
                for l in 0..m_steps - 1 {
                    r[(row, reduced(j, l))] = qp.hessian[(full(i, k), full(j, l))]
                        - qp.hessian[(full(i, k), full(j, m_steps - 1))]
                        - qp.hessian[(full(i, m_steps - 1), full(j, l))]
                        + qp.hessian[(full(i, m_steps - 1), full(j, m_steps - 1))];
                }
            }
        }
    }
    let chol = r
        .cholesky()
        .ok_or_else(|| Error::Numerical("reduced oracle system not positive definite".into()))?;
    let y = chol.solve(&rhs);
    let mut v = part;
    for i in 0..n {
        let mut carried = 0.0;
        for k in 0..m_steps - 1 {
            let yk = y[reduced(i, k)];
            v[full(i, k)] += yk;
            carried += yk;
        }
        v[full(i, m_steps - 1)] -= carried;
    }
    Ok(v)
}

fn solve_bordered(qp: &QPSystem) -> Option<DVector<f64>> {
    let dim = qp.hessian.nrows();
    let n = qp.targets.len();
    let total = dim + n;
    let mut kkt = DMatrix::zeros(total, total);
    for i in 0..dim {
        for j in 0..dim {
            kkt[(i, j)] = 2.0 * qp.hessian[(i, j)];
        }
    }
    for i in 0..n {
        for j in 0..dim {
            kkt[(dim + i, j)] = qp.constraints[(i, j)];
            kkt[(j, dim + i)] = qp.constraints[(i, j)];
        }
    }
    let mut rhs = DVector::zeros(total);
    for i in 0..n {
        rhs[dim + i] = qp.targets[i];
    }
    let sol = kkt.lu().solve(&rhs)?;
    Some(sol.rows(0, dim).into_owned())
}

/// Relative stationarity and constraint residuals for a candidate velocity.
fn residuals(qp: &QPSystem, v: &DVector<f64>) -> (f64, f64) {
    let hv2 = &qp.hessian * v * 2.0;
    // Multipliers in closed form: each constraint row is a constant −Δt on
    // one asset's slots, so stationarity forces Wᵀμ = −2Hv averaged there.
    let n = qp.targets.len();
    let dim = qp.hessian.nrows();
    let m_steps = dim / n;
    let dt = -qp.constraints[(0, 0)];
    let mut wt_mu = DVector::zeros(dim);
    for i in 0..n {
        let mut mean = 0.0;
        for k in 0..m_steps {
            mean += hv2[i * m_steps + k];
        }
        mean /= m_steps as f64;
        // Wᵀμ entry is −Δt·μ_i; the best μ_i makes it cancel the mean.
        let mu_i = mean / dt;
        for k in 0..m_steps {
            wt_mu[i * m_steps + k] = -dt * mu_i;
        }
    }
    let scale = hv2.norm().max(wt_mu.norm()).max(f64::MIN_POSITIVE);
    let kkt_res = (&hv2 + &wt_mu).norm() / scale;
    let con = &qp.constraints * v - &qp.targets;
    let con_res = con.norm() / qp.targets.norm().max(f64::MIN_POSITIVE);
    (kkt_res, con_res)
}

/// Drift residual deciding exact optimality of the rolling-horizon strategy
/// in the single-asset, two-driver model: the strategy reproduces the
/// dynamically optimal solution if and only if this expression vanishes.
/// Under coordinated variation (second dispersion twice the first, perfect
/// anticorrelation, equal reversion times, states on ξ¹ + 2ξ² = 0) it is
/// identically zero.
pub fn rhs_residual(model: &MarketModel, xi1: f64, xi2: f64) -> Result<f64> {
    if model.asset_count() != 1 {
        return Err(Error::Config(
            "rolling-horizon residual is defined for single-asset models".into(),
        ));
    }
    let d1 = model.delta()[0];
    let d2 = model.delta()[1];
    let b1 = model.beta()[0];
    let b2 = model.beta()[1];
    let vr = model.varrho()[(0, 1)];
    Ok(0.5 * vr * b1 * b2 * (d2 / d1).sqrt() * d2 - 0.5 * xi1
        + 0.5 * (d1.powi(3) / (d2 * d2)) * b1 * b1
        - (d2 * d2 / d1) * xi2
        + 0.125 * b2 * b2 * d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market::{sample_paths, NoiseSource};
    use crate::strategies::{
        cc_schedule, run_strategy, InnerNoise, StrategyKind,
    };
    use crate::noise::SamplerKind;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    fn model(lambda: f64, beta: f64) -> MarketModel {
        MarketModel::new(
            dvector![0.05],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0, 1.0],
            dvector![beta, beta],
            dmatrix![1.0, -0.2; -0.2, 1.0],
            lambda,
        )
        .unwrap()
    }

    fn path_for(model: &MarketModel, grid: &TimeGrid, seed: u64) -> MarketPath {
        sample_paths(
            model,
            grid,
            &DVector::zeros(model.driver_count()),
            0,
            grid.steps,
            1,
            NoiseSource::Seeded(seed),
        )
        .unwrap()
        .remove(0)
    }

    #[test]
    fn three_step_solution_matches_reference_values() {
        // Constant coefficients η = σ² = 0.002, λ = 0.1, T = 1, M = 3,
        // x₀ = 100; reference computed by an independent dense solve.
        let m = MarketModel::new(
            dvector![0.002f64.sqrt()],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0, 1.0],
            dvector![0.0, 0.0],
            DMatrix::identity(2, 2),
            0.1,
        )
        .unwrap();
        let grid = TimeGrid::new(1.0, 3).unwrap();
        let path = path_for(&m, &grid, 1);
        let (sched, diag) = discrete_optimal(&dvector![100.0], &path, &grid, 0.1).unwrap();
        let expect_v = [-101.83285349337007, -99.63099630996311, -98.53615019666682];
        for (k, ev) in expect_v.iter().enumerate() {
            assert_relative_eq!(sched.velocity(k)[0], *ev, max_relative = 1e-9);
        }
        assert_relative_eq!(sched.inventory()[(0, 0)], 100.0, max_relative = 1e-10);
        assert_relative_eq!(sched.inventory()[(1, 0)], 66.05571550220998, max_relative = 1e-9);
        assert_relative_eq!(sched.inventory()[(2, 0)], 32.84538339888894, max_relative = 1e-9);
        assert_eq!(sched.inventory()[(3, 0)], 0.0);
        assert_relative_eq!(diag.objective, 21.033237365340685, max_relative = 1e-10);
        assert!(diag.kkt_residual <= 1e-8);
        assert!(diag.constraint_residual <= 1e-10);
    }

    #[test]
    fn zero_risk_spreads_trading_by_inverse_impact() {
        // λ = 0: cost = Δt Σ η_k v_k² under a single sum constraint, so
        // v_k ∝ 1/η_k and the optimal cost is x₀²/(Δt Σ 1/η_k).
        let m = model(0.0, 1.0);
        let grid = TimeGrid::new(10.0, 16).unwrap();
        let path = path_for(&m, &grid, 7);
        let x0 = dvector![100.0];
        let (sched, diag) = discrete_optimal(&x0, &path, &grid, 0.0).unwrap();
        let mut inv_sum = 0.0;
        for k in 0..grid.steps {
            inv_sum += 1.0 / path.state(k).impact.as_matrix()[(0, 0)];
        }
        let expect = 100.0 * 100.0 / (grid.dt() * inv_sum);
        assert_relative_eq!(diag.objective, expect, max_relative = 1e-10);
        // Velocity proportional to inverse impact.
        let eta0 = path.state(0).impact.as_matrix()[(0, 0)];
        for k in 1..grid.steps {
            let eta_k = path.state(k).impact.as_matrix()[(0, 0)];
            assert_relative_eq!(
                sched.velocity(k)[0] * eta_k,
                sched.velocity(0)[0] * eta0,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn zero_risk_frozen_impact_trades_linearly() {
        let m = model(0.0, 0.0);
        let grid = TimeGrid::new(10.0, 10).unwrap();
        let path = path_for(&m, &grid, 2);
        let (sched, _) = discrete_optimal(&dvector![50.0], &path, &grid, 0.0).unwrap();
        for k in 0..grid.steps {
            assert_relative_eq!(sched.velocity(k)[0], -5.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn elimination_and_bordered_solves_agree() {
        for (n_assets, seed) in [(1usize, 4u64), (2, 9)] {
            let m = if n_assets == 1 {
                model(1e-3, 1.0)
            } else {
                MarketModel::new(
                    dvector![0.045, 0.055],
                    dmatrix![0.0025, 0.0008; 0.0008, 0.002],
                    dmatrix![1.0, -0.5; -0.5, 1.0],
                    DVector::from_element(5, 1.0),
                    DVector::from_element(5, 0.8),
                    DMatrix::identity(5, 5),
                    1e-3,
                )
                .unwrap()
            };
            let grid = TimeGrid::new(10.0, 12).unwrap();
            let path = path_for(&m, &grid, seed);
            let x0 = DVector::from_element(n_assets, 100.0);
            let qp = qp_system(&x0, &path, &grid, m.lambda()).unwrap();
            let v_kkt = solve_bordered(&qp).unwrap();
            let v_red = solve_by_elimination(&qp).unwrap();
            for i in 0..v_kkt.len() {
                assert_relative_eq!(v_kkt[i], v_red[i], max_relative = 1e-9, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn oracle_approaches_the_continuous_closed_form_as_the_grid_refines() {
        // Frozen coefficients: the discrete first-order conditions form the
        // central second difference of the continuous optimality ODE, so the
        // nodal gap to the closed-form trajectory shrinks second-order in Δt
        // — halving the step quarters the gap.
        let m = model(0.1, 0.0);
        let x0 = dvector![100.0];
        let mut errs = Vec::new();
        for steps in [400usize, 800] {
            let grid = TimeGrid::new(10.0, steps).unwrap();
            let path = path_for(&m, &grid, 1);
            let (sched, _) = discrete_optimal(&x0, &path, &grid, 0.1).unwrap();
            let cc = cc_schedule(&x0, &grid, path.state(0), 0.1).unwrap();
            let mut emax = 0.0f64;
            for k in 0..=steps {
                emax = emax.max((sched.inventory()[(k, 0)] - cc.inventory()[(k, 0)]).abs());
            }
            errs.push(emax);
        }
        assert!(errs[0] < 1e-2, "coarse-grid gap too large: {}", errs[0]);
        let ratio = errs[1] / errs[0];
        assert!(
            (0.2..0.32).contains(&ratio),
            "halving the step did not quarter the gap: {errs:?}"
        );
    }

    #[test]
    fn oracle_dominates_causal_strategies_and_perturbations() {
        let m = model(1e-3, 1.0);
        let grid = TimeGrid::new(10.0, 12).unwrap();
        let x0 = dvector![100.0];
        let inner = InnerNoise {
            sampler: SamplerKind::Pseudo,
            scenarios: 12,
            base_seed: 40,
        };
        for seed in [11u64, 12, 13] {
            let path = path_for(&m, &grid, seed);
            let (osched, diag) = discrete_optimal(&x0, &path, &grid, m.lambda()).unwrap();
            let ocost = crate::costeval::path_cost(&osched, &path, m.lambda())
                .unwrap()
                .total;
            assert_relative_eq!(ocost, diag.objective, max_relative = 1e-9);
            for kind in [
                StrategyKind::Cc,
                StrategyKind::Rhs,
                StrategyKind::RhmcI,
                StrategyKind::RhmcII,
            ] {
                let s = run_strategy(kind, &x0, &path, &m, &grid, &inner).unwrap();
                let c = crate::costeval::path_cost(&s, &path, m.lambda()).unwrap().total;
                assert!(
                    ocost <= c * (1.0 + 1e-9),
                    "oracle lost to {kind} on seed {seed}: {ocost} vs {c}"
                );
            }
            // Random feasible perturbations: add zero-sum noise to the
            // oracle velocities, rebuild by suffix sums (still liquidates).
            let mut rng = crate::synthetic::seeded_rng(seed.wrapping_mul(77));
            for _ in 0..100 {
                let mut pert = DMatrix::zeros(grid.steps + 1, 1);
                let mut noise: Vec<f64> = (0..grid.steps)
                    .map(|_| crate::noise::symmetric_unit_f64(&mut rng))
                    .collect();
                let mean = noise.iter().sum::<f64>() / noise.len() as f64;
                for z in noise.iter_mut() {
                    *z -= mean;
                }
                let mut suffix = 0.0;
                for k in (0..grid.steps).rev() {
                    suffix += osched.velocity(k)[0] + noise[k];
                    pert[(k, 0)] = -grid.dt() * suffix;
                }
                let ps = Schedule::from_inventory(pert, grid.t_end).unwrap();
                let pc = crate::costeval::path_cost(&ps, &path, m.lambda()).unwrap().total;
                assert!(
                    ocost <= pc * (1.0 + 1e-9),
                    "perturbation beat the oracle: {ocost} vs {pc}"
                );
            }
        }
    }

    #[test]
    fn qp_rejects_bad_inputs() {
        let m = model(1e-3, 1.0);
        let grid = TimeGrid::new(10.0, 8).unwrap();
        let path = path_for(&m, &grid, 3);
        assert!(qp_system(&dvector![1.0, 2.0], &path, &grid, 1e-3).is_err());
        assert!(qp_system(&dvector![1.0], &path, &grid, -1.0).is_err());
        // Path not starting at step 0.
        let tail = sample_paths(
            &m,
            &grid,
            &DVector::zeros(2),
            2,
            grid.steps,
            1,
            NoiseSource::Seeded(5),
        )
        .unwrap()
        .remove(0);
        assert!(qp_system(&dvector![1.0], &tail, &grid, 1e-3).is_err());
    }

    #[test]
    fn strategy_residual_reference_points() {
        // Coordinated variation (second dispersion doubled, perfect
        // anticorrelation, equal reversion): identically zero on the
        // constraint line ξ¹ + 2ξ² = 0.
        let cv = MarketModel::coordinated_variation(0.031, 0.002, 1.0, 1.0, 1e-5).unwrap();
        for xi2 in [-0.7, -0.1, 0.0, 0.4, 1.3] {
            let r = rhs_residual(&cv, -2.0 * xi2, xi2).unwrap();
            assert!(r.abs() < 1e-14, "residual {r} at xi2 = {xi2}");
        }
        // Uncoupled spot value: ½ + ⅛.
        let flat = MarketModel::new(
            dvector![0.05],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0, 1.0],
            dvector![1.0, 1.0],
            DMatrix::identity(2, 2),
            0.0,
        )
        .unwrap();
        assert_relative_eq!(rhs_residual(&flat, 0.0, 0.0).unwrap(), 0.625);
        // Zero dispersion, centered state: every term vanishes.
        let still = model(0.0, 0.0);
        assert_eq!(rhs_residual(&still, 0.0, 0.0).unwrap(), 0.0);
        // Affine in the first state with slope −½, for any parameters.
        for (m, xi2) in [(&cv, 0.3), (&flat, -0.2)] {
            let r0 = rhs_residual(m, 1.0, xi2).unwrap();
            let r1 = rhs_residual(m, 2.0, xi2).unwrap();
            assert_relative_eq!(r1 - r0, -0.5, max_relative = 1e-12);
        }
        // Multi-asset models are rejected.
        let two = MarketModel::new(
            dvector![0.05, 0.05],
            dmatrix![0.002, 0.0; 0.0, 0.002],
            DMatrix::identity(2, 2),
            DVector::from_element(5, 1.0),
            DVector::from_element(5, 1.0),
            DMatrix::identity(5, 5),
            0.0,
        )
        .unwrap();
        assert!(rhs_residual(&two, 0.0, 0.0).is_err());
    }
}
