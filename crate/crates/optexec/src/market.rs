//! Stochastic liquidity/volatility market model.
//!
//! n assets carry d = n(n+3)/2 exponential Ornstein–Uhlenbeck drivers: one
//! per asset volatility (ξ¹..ξⁿ) and one per impact-matrix entry on or below
//! the diagonal. Driver k reverts to zero at rate 1/δ_k with dispersion β_k,
//!
//! ```text
//!   dξ^k = −(ξ^k/δ_k) dt + (β_k/√δ_k) dB^k,     dB^k dB^m = ϱ_km dt,
//! ```
//!
//! and modulates levels multiplicatively:
//! σ_k(t) = σ̄_k e^{ξ^k(t)}, Ξ_{kℓ}(t) = η̄_{kℓ} e^{ξ^{idx(k,ℓ)}(t)}.
//! Transitions are sampled from the exact discrete-time solution, never an
//! Euler scheme, so grid refinement changes only the decision frequency, not
//! the law of the drivers.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::TimeGrid;
use crate::noise::{chacha, derive_seed, inverse_normal_cdf, unit_open_f64};
use crate::spd::{sym_eigen_sorted, SymPosDef};
use crate::{Error, Result};

/// Relative eigenvalue floor applied when exponential off-diagonal modulation
/// pushes the impact matrix out of the positive definite cone.
const IMPACT_PROJECTION_FLOOR: f64 = 1e-10;

/// PSD tolerance for the driver correlation matrix (allows the singular
/// perfectly anticorrelated coordinated-variation case).
const VARRHO_EIGEN_TOL: f64 = -1e-10;

/// Market model parameters, validated at construction.
#[derive(Debug, Clone)]
pub struct MarketModel {
    n: usize,
    sigma_bar: DVector<f64>,
    rho: DMatrix<f64>,
    eta_bar: DMatrix<f64>,
    delta: DVector<f64>,
    beta: DVector<f64>,
    varrho: DMatrix<f64>,
    lambda: f64,
    /// Factor L with LLᵀ = ϱ (eigendecomposition-based, PSD-safe).
    driver_factor: DMatrix<f64>,
}

/// Instantaneous market coefficients at one driver state.
#[derive(Debug, Clone)]
pub struct MarketState {
    /// Temporary impact matrix Ξ(t), projected back to PD if necessary.
    pub impact: SymPosDef,
    /// Price covariance Σ(t).
    pub covariance: SymPosDef,
    /// Whether the impact matrix needed an eigenvalue-floor projection.
    pub projected: bool,
}

/// One sampled trajectory of driver states and market coefficients over a
/// contiguous range of grid steps.
#[derive(Debug, Clone)]
pub struct MarketPath {
    /// Grid step of the first stored state.
    pub start_step: usize,
    /// Driver states ξ(t_k), one per stored step.
    pub xi: Vec<DVector<f64>>,
    /// Market coefficients, aligned with `xi`.
    pub states: Vec<MarketState>,
}

impl MarketPath {
    /// Market coefficients at absolute grid step `step`.
    pub fn state(&self, step: usize) -> &MarketState {
        &self.states[step - self.start_step]
    }

    /// Driver state at absolute grid step `step`.
    pub fn xi_at(&self, step: usize) -> &DVector<f64> {
        &self.xi[step - self.start_step]
    }

    /// Last grid step covered.
    pub fn end_step(&self) -> usize {
        self.start_step + self.states.len() - 1
    }

    /// Number of impact-matrix projections along the path.
    pub fn projection_count(&self) -> usize {
        self.states.iter().filter(|s| s.projected).count()
    }
}

/// Source of the standard normals consumed by path sampling.
pub enum NoiseSource<'a> {
    /// Row r drives path r; coordinates are time-major (first d coordinates
    /// drive the first transition).
    Block(&'a DMatrix<f64>),
    /// Path r uses a fresh generator seeded with `derive_seed(seed, [r])`.
    Seeded(u64),
}

/// Precomputed exact-transition coefficients for a fixed step width.
#[derive(Debug, Clone)]
pub struct TransitionCoeffs {
    decay: DVector<f64>,
    noise_scale: DVector<f64>,
}

impl MarketModel {
    /// Validate and build a model.
    ///
    /// * `sigma_bar` — n mean volatilities, strictly positive.
    /// * `eta_bar` — n×n mean impact matrix, symmetric positive definite.
    /// * `rho` — n×n asset price correlation, unit diagonal, positive
    ///   definite.
    /// * `delta`, `beta` — d mean-reversion times (positive) and dispersions
    ///   (nonnegative), d = n(n+3)/2.
    /// * `varrho` — d×d driver correlation, unit diagonal, positive
    ///   semidefinite.
    /// * `lambda` — risk aversion, nonnegative.
    pub fn new(
        sigma_bar: DVector<f64>,
        eta_bar: DMatrix<f64>,
        rho: DMatrix<f64>,
        delta: DVector<f64>,
        beta: DVector<f64>,
        varrho: DMatrix<f64>,
        lambda: f64,
    ) -> Result<Self> {
        let n = sigma_bar.len();
        if n == 0 {
            return Err(Error::Config("model needs at least one asset".into()));
        }
        let d = Self::driver_count_for(n);
        if !sigma_bar.iter().all(|&s| s.is_finite() && s > 0.0) {
            return Err(Error::Config(
                "sigma_bar entries must be finite and positive".into(),
            ));
        }
        if eta_bar.nrows() != n || eta_bar.ncols() != n {
            return Err(Error::Config(format!(
                "eta_bar must be {n}x{n}, got {}x{}",
                eta_bar.nrows(),
                eta_bar.ncols()
            )));
        }
        let eta_bar = SymPosDef::new(eta_bar, "eta_bar")
            .map_err(|e| Error::Config(format!("eta_bar: {e}")))?
            .into_matrix();
        let rho = validate_correlation(rho, n, "rho", false)?;
        if delta.len() != d || beta.len() != d {
            return Err(Error::Config(format!(
                "delta and beta must have length d = n(n+3)/2 = {d}, got {} and {}",
                delta.len(),
                beta.len()
            )));
        }
        if !delta.iter().all(|&x| x.is_finite() && x > 0.0) {
            return Err(Error::Config("delta entries must be positive".into()));
        }
        if !beta.iter().all(|&x| x.is_finite() && x >= 0.0) {
            return Err(Error::Config("beta entries must be nonnegative".into()));
        }
        let varrho = validate_correlation(varrho, d, "varrho", true)?;
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        // PSD-safe correlation factor: L = V diag(√max(w,0)) from the sorted
        // eigendecomposition, so LLᵀ = ϱ also in singular cases.
        let (vals, vecs) = sym_eigen_sorted(&varrho);
        let mut driver_factor = vecs;
        for j in 0..d {
            let scale = vals[j].max(0.0).sqrt();
            for i in 0..d {
                driver_factor[(i, j)] *= scale;
            }
        }
        Ok(MarketModel {
            n,
            sigma_bar,
            rho,
            eta_bar,
            delta,
            beta,
            varrho,
            lambda,
            driver_factor,
        })
    }

    /// Single-asset coordinated-variation model: liquidity falls exactly when
    /// volatility rises, keeping σ²(t)η(t) constant. From the volatility
    /// driver's (δ₁, β₁) the liquidity driver is constrained to δ₂ = δ₁,
    /// β₂ = 2β₁, ϱ₁₂ = −1, and consistent states satisfy ξ² = −2ξ¹.
    pub fn coordinated_variation(
        sigma_bar: f64,
        eta_bar: f64,
        delta1: f64,
        beta1: f64,
        lambda: f64,
    ) -> Result<Self> {
        MarketModel::new(
            DVector::from_element(1, sigma_bar),
            DMatrix::from_element(1, 1, eta_bar),
            DMatrix::identity(1, 1),
            DVector::from_vec(vec![delta1, delta1]),
            DVector::from_vec(vec![beta1, 2.0 * beta1]),
            DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
            lambda,
        )
    }

    /// Number of assets n.
    pub fn asset_count(&self) -> usize {
        self.n
    }

    /// Number of drivers d = n(n+3)/2.
    pub fn driver_count(&self) -> usize {
        Self::driver_count_for(self.n)
    }

    fn driver_count_for(n: usize) -> usize {
        n * (n + 3) / 2
    }

    /// Risk aversion λ.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Mean volatilities σ̄.
    pub fn sigma_bar(&self) -> &DVector<f64> {
        &self.sigma_bar
    }

    /// Mean impact matrix η̄.
    pub fn eta_bar(&self) -> &DMatrix<f64> {
        &self.eta_bar
    }

    /// Asset price correlation ρ.
    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }

    /// Driver correlation ϱ.
    pub fn varrho(&self) -> &DMatrix<f64> {
        &self.varrho
    }

    /// Driver mean-reversion times δ.
    pub fn delta(&self) -> &DVector<f64> {
        &self.delta
    }

    /// Driver dispersions β.
    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    /// Canonical driver index for impact entry (k, ℓ), 0-based: the first n
    /// drivers are the volatilities, then row-by-row the lower triangle of
    /// the impact matrix.
    pub fn driver_index(&self, k: usize, l: usize) -> usize {
        let (hi, lo) = if k >= l { (k, l) } else { (l, k) };
        debug_assert!(hi < self.n);
        self.n + hi * (hi + 1) / 2 + lo
    }

    /// Mean-level market coefficients (all drivers at zero).
    pub fn mean_state(&self) -> MarketState {
        self.build_state(&DVector::zeros(self.driver_count()))
            .expect("mean state is valid by model validation")
    }

    /// Market coefficients at driver state ξ. The covariance inherits
    /// positive definiteness from ρ; the impact matrix may lose it under
    /// off-diagonal modulation and is then projected back by flooring its
    /// eigenvalues at 1e-10·trace/n (flagged in the result).
    pub fn build_state(&self, xi: &DVector<f64>) -> Result<MarketState> {
        let d = self.driver_count();
        if xi.len() != d {
            return Err(Error::DimensionMismatch {
                context: "build_state",
                expected: d,
                got: xi.len(),
            });
        }
        let n = self.n;
        let sigma: Vec<f64> = (0..n).map(|k| self.sigma_bar[k] * xi[k].exp()).collect();
        let covariance = DMatrix::from_fn(n, n, |i, j| self.rho[(i, j)] * sigma[i] * sigma[j]);
        let covariance = SymPosDef::new(covariance, "covariance state")?;

        let impact_raw =
            DMatrix::from_fn(n, n, |i, j| self.eta_bar[(i, j)] * xi[self.driver_index(i, j)].exp());
        match SymPosDef::new(impact_raw.clone(), "impact state") {
            Ok(impact) => Ok(MarketState {
                impact,
                covariance,
                projected: false,
            }),
            Err(_) => {
                let (vals, vecs) = sym_eigen_sorted(&impact_raw);
                let floor = IMPACT_PROJECTION_FLOOR * impact_raw.trace() / n as f64;
                let clamped = vals.map(|w| w.max(floor));
                let fixed = &vecs * DMatrix::from_diagonal(&clamped) * vecs.transpose();
                let impact = SymPosDef::new(fixed, "impact projection")?;
                Ok(MarketState {
                    impact,
                    covariance,
                    projected: true,
                })
            }
        }
    }

    /// Exact-transition coefficients for step width `dt`: per driver, the
    /// decay e^{−dt/δ} and the noise scale β√((1−e^{−2dt/δ})/2).
    pub fn transition_coeffs(&self, dt: f64) -> TransitionCoeffs {
        let d = self.driver_count();
        let mut decay = DVector::zeros(d);
        let mut noise_scale = DVector::zeros(d);
        for k in 0..d {
            decay[k] = (-dt / self.delta[k]).exp();
            noise_scale[k] = self.beta[k] * ((1.0 - (-2.0 * dt / self.delta[k]).exp()) / 2.0).sqrt();
        }
        TransitionCoeffs { decay, noise_scale }
    }

    /// One exact transition over `dt` driven by iid standard normals `z`
    /// (length d); correlation is applied internally through the model's
    /// factor of ϱ.
    pub fn ou_transition(&self, xi: &DVector<f64>, dt: f64, z: &DVector<f64>) -> DVector<f64> {
        let coeffs = self.transition_coeffs(dt);
        let mut out = xi.clone();
        self.ou_step_into(&coeffs, z.as_slice(), &mut out);
        out
    }

    /// In-place exact transition with precomputed coefficients.
    /// `z` holds d iid standard normals; `xi` is advanced one step.
    pub fn ou_step_into(&self, coeffs: &TransitionCoeffs, z: &[f64], xi: &mut DVector<f64>) {
        let d = self.driver_count();
        debug_assert_eq!(z.len(), d);
        for k in 0..d {
            let mut corr = 0.0;
            for m in 0..d {
                corr += self.driver_factor[(k, m)] * z[m];
            }
            xi[k] = xi[k] * coeffs.decay[k] + coeffs.noise_scale[k] * corr;
        }
    }
}

fn validate_correlation(
    m: DMatrix<f64>,
    dim: usize,
    name: &str,
    allow_semidefinite: bool,
) -> Result<DMatrix<f64>> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Config(format!(
            "{name} must be {dim}x{dim}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    for i in 0..dim {
        if (m[(i, i)] - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "{name} diagonal entry {i} is {}, must be 1",
                m[(i, i)]
            )));
        }
        for j in 0..dim {
            let v = m[(i, j)];
            if !v.is_finite() || v.abs() > 1.0 + 1e-12 {
                return Err(Error::Config(format!(
                    "{name}[{i},{j}] = {v} outside [-1, 1]"
                )));
            }
            if (v - m[(j, i)]).abs() > 1e-12 {
                return Err(Error::Config(format!("{name} is not symmetric at ({i},{j})")));
            }
        }
    }
    let sym = (&m + m.transpose()) * 0.5;
    let (vals, _) = sym_eigen_sorted(&sym);
    let tol = if allow_semidefinite { VARRHO_EIGEN_TOL } else { 1e-12 };
    if vals[0] < tol {
        return Err(Error::Config(format!(
            "{name} is not positive {}definite (smallest eigenvalue {:.3e})",
            if allow_semidefinite { "semi" } else { "" },
            vals[0]
        )));
    }
    Ok(sym)
}

/// Sample `count` driver paths from `start_xi` at grid step `start_step`
/// (inclusive) through `end_step` (inclusive), consuming
/// (end_step − start_step)·d standard normals per path from `source`.
/// The state at `start_step` is rebuilt from `start_xi` and shared by every
/// path; transitions use the exact discrete-time law.
pub fn sample_paths(
    model: &MarketModel,
    grid: &TimeGrid,
    start_xi: &DVector<f64>,
    start_step: usize,
    end_step: usize,
    count: usize,
    source: NoiseSource<'_>,
) -> Result<Vec<MarketPath>> {
    let d = model.driver_count();
    if start_step > end_step || end_step > grid.steps {
        return Err(Error::Config(format!(
            "path range [{start_step}, {end_step}] invalid for grid with {} steps",
            grid.steps
        )));
    }
    let transitions = end_step - start_step;
    if let NoiseSource::Block(block) = &source {
        if block.nrows() < count {
            return Err(Error::DimensionMismatch {
                context: "sample_paths block rows",
                expected: count,
                got: block.nrows(),
            });
        }
        if block.ncols() < transitions * d {
            return Err(Error::DimensionMismatch {
                context: "sample_paths block columns",
                expected: transitions * d,
                got: block.ncols(),
            });
        }
    }
    let coeffs = model.transition_coeffs(grid.dt());
    let start_state = model.build_state(start_xi)?;
    let mut out = Vec::with_capacity(count);
    let mut zbuf = vec![0.0f64; d];
    for r in 0..count {
        let mut xi = start_xi.clone();
        let mut xis = Vec::with_capacity(transitions + 1);
        let mut states = Vec::with_capacity(transitions + 1);
        xis.push(xi.clone());
        states.push(start_state.clone());
        let mut rng: Option<ChaCha8Rng> = match &source {
            NoiseSource::Seeded(seed) => Some(chacha(derive_seed(*seed, &[r as u64]))),
            NoiseSource::Block(_) => None,
        };
        for step in 0..transitions {
            match &source {
                NoiseSource::Block(block) => {
                    for c in 0..d {
                        zbuf[c] = block[(r, step * d + c)];
                    }
                }
                NoiseSource::Seeded(_) => {
                    let rng = rng.as_mut().expect("seeded source has an rng");
                    for z in zbuf.iter_mut() {
                        *z = inverse_normal_cdf(unit_open_f64(rng));
                    }
                }
            }
            model.ou_step_into(&coeffs, &zbuf, &mut xi);
            xis.push(xi.clone());
            states.push(model.build_state(&xi)?);
        }
        out.push(MarketPath {
            start_step,
            xi: xis,
            states,
        });
    }
    Ok(out)
}

/// Sample the M×n matrix of price increments along a path covering steps
/// 0..=M−1 (at least): row m is ΔS over [t_m, t_{m+1}], distributed
/// N(0, Σ(t_m)·Δt), independent across steps and of the drivers.
pub fn sample_prices(
    model: &MarketModel,
    grid: &TimeGrid,
    path: &MarketPath,
    seed: u64,
) -> Result<DMatrix<f64>> {
    let n = model.asset_count();
    let m_steps = grid.steps;
    if path.start_step != 0 || path.end_step() < m_steps - 1 {
        return Err(Error::Config(
            "price sampling needs a path covering steps 0..=M-1".into(),
        ));
    }
    let sqrt_dt = grid.dt().sqrt();
    let mut rng = chacha(seed);
    let mut out = DMatrix::zeros(m_steps, n);
    let mut z = DVector::zeros(n);
    for m in 0..m_steps {
        let chol = path
            .state(m)
            .covariance
            .as_matrix()
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("covariance lost positive definiteness".into()))?;
        for c in 0..n {
            z[c] = inverse_normal_cdf(unit_open_f64(&mut rng));
        }
        let ds = chol.l() * &z * sqrt_dt;
        for c in 0..n {
            out[(m, c)] = ds[c];
        }
    }
    Ok(out)
}

/// Convenience serde view of a model for configs and metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSummary {
    pub assets: usize,
    pub drivers: usize,
    pub lambda: f64,
}

impl From<&MarketModel> for ModelSummary {
    fn from(m: &MarketModel) -> Self {
        ModelSummary {
            assets: m.asset_count(),
            drivers: m.driver_count(),
            lambda: m.lambda(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::{dmatrix, dvector};

    fn one_asset_model() -> MarketModel {
        MarketModel::new(
            dvector![0.05],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0, 1.0],
            dvector![1.0, 1.0],
            dmatrix![1.0, -0.2; -0.2, 1.0],
            1e-3,
        )
        .unwrap()
    }

    fn two_asset_model(eta12: f64) -> MarketModel {
        let varrho = DMatrix::from_row_slice(
            5,
            5,
            &[
                1.0, 0.8, 0.1, -0.6, -0.6, //
                0.8, 1.0, 0.1, -0.6, -0.6, //
                0.1, 0.1, 1.0, -0.1, -0.1, //
                -0.6, -0.6, -0.1, 1.0, 0.7, //
                -0.6, -0.6, -0.1, 0.7, 1.0,
            ],
        );
        MarketModel::new(
            dvector![(1.0f64 / 500.0).sqrt(), (3.0f64 / 1000.0).sqrt()],
            dmatrix![1.0/400.0, eta12; eta12, 1.0/500.0],
            dmatrix![1.0, -0.8; -0.8, 1.0],
            DVector::from_element(5, 1.0),
            DVector::from_element(5, 1.0),
            varrho,
            1e-5,
        )
        .unwrap()
    }

    #[test]
    fn driver_count_and_index_map() {
        let m1 = one_asset_model();
        assert_eq!(m1.driver_count(), 2);
        assert_eq!(m1.driver_index(0, 0), 1);
        let m2 = two_asset_model(1e-3);
        assert_eq!(m2.driver_count(), 5);
        assert_eq!(m2.driver_index(0, 0), 2);
        assert_eq!(m2.driver_index(1, 0), 3);
        assert_eq!(m2.driver_index(0, 1), 3);
        assert_eq!(m2.driver_index(1, 1), 4);
    }

    #[test]
    fn mean_state_reproduces_mean_levels() {
        let m = two_asset_model(1e-3);
        let st = m.mean_state();
        assert_relative_eq!(st.impact.as_matrix()[(0, 0)], 1.0 / 400.0, max_relative = 1e-15);
        assert_relative_eq!(st.impact.as_matrix()[(0, 1)], 1e-3, max_relative = 1e-15);
        let s1s2 = (1.0f64 / 500.0).sqrt() * (3.0f64 / 1000.0).sqrt();
        assert_relative_eq!(st.covariance.as_matrix()[(0, 1)], -0.8 * s1s2, max_relative = 1e-14);
        assert!(!st.projected);
    }

    #[test]
    fn build_state_applies_driver_exponentials() {
        let m = two_asset_model(1e-3);
        let xi = dvector![0.1, -0.2, 0.3, 0.0, -0.5];
        let st = m.build_state(&xi).unwrap();
        assert_relative_eq!(
            st.impact.as_matrix()[(0, 0)],
            (1.0 / 400.0) * 0.3f64.exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            st.impact.as_matrix()[(1, 1)],
            (1.0 / 500.0) * (-0.5f64).exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            st.covariance.as_matrix()[(0, 0)],
            (1.0 / 500.0) * (0.2f64).exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn impact_projection_restores_positive_definiteness() {
        // Nearly singular mean impact + a large cross-driver excursion makes
        // the raw modulated matrix indefinite.
        let m = MarketModel::new(
            dvector![0.05, 0.05],
            dmatrix![1.0, 0.999; 0.999, 1.0],
            DMatrix::identity(2, 2),
            DVector::from_element(5, 1.0),
            DVector::from_element(5, 1.0),
            DMatrix::identity(5, 5),
            0.0,
        )
        .unwrap();
        let xi = dvector![0.0, 0.0, 0.0, 0.5, 0.0];
        let st = m.build_state(&xi).unwrap();
        assert!(st.projected);
        let (vals, _) = sym_eigen_sorted(st.impact.as_matrix());
        assert!(vals[0] > 0.0);
        // Floor is tiny relative to the trace: the healthy modes are intact.
        assert_relative_eq!(
            st.impact.as_matrix()[(0, 0)],
            1.0,
            max_relative = 0.3
        );
    }

    #[test]
    fn ou_transition_moments_are_exact() {
        let m = one_asset_model();
        // Frozen one-step noise variance for dt = 0.01, delta = beta = 1:
        // (1 - e^{-0.02}) / 2.
        let coeffs = m.transition_coeffs(0.01);
        assert_relative_eq!(
            coeffs.noise_scale[0] * coeffs.noise_scale[0],
            9.9006633466223489e-3,
            max_relative = 1e-14
        );
        assert_relative_eq!(coeffs.decay[0], (-0.01f64).exp(), max_relative = 1e-15);
        // Mean decay through the public transition with zero noise.
        let xi1 = m.ou_transition(&dvector![0.5, -0.25], 0.3, &dvector![0.0, 0.0]);
        assert_relative_eq!(xi1[0], 0.5 * (-0.3f64).exp(), max_relative = 1e-14);
        assert_relative_eq!(xi1[1], -0.25 * (-0.3f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn stationary_variance_reached_by_exact_recursion() {
        // Var_{m+1} = decay²·Var_m + scale²  →  β²/2.
        let m = one_asset_model();
        let coeffs = m.transition_coeffs(0.05);
        let mut var = 0.0;
        for _ in 0..4000 {
            var = coeffs.decay[0] * coeffs.decay[0] * var
                + coeffs.noise_scale[0] * coeffs.noise_scale[0];
        }
        assert_relative_eq!(var, 0.5, max_relative = 1e-12);
    }

    #[test]
    fn sampled_increment_correlation_matches_varrho() {
        let m = two_asset_model(1e-3);
        let grid = TimeGrid::new(10.0, 1).unwrap();
        let n_samples = 100_000;
        let paths = sample_paths(
            &m,
            &grid,
            &DVector::zeros(5),
            0,
            1,
            n_samples,
            NoiseSource::Seeded(12345),
        )
        .unwrap();
        // Increment over one step from xi = 0 is noise_scale ∘ (L z); its
        // correlation matrix is varrho.
        let d = 5;
        let mut cov = DMatrix::zeros(d, d);
        for p in &paths {
            let inc = &p.xi[1];
            cov += inc * inc.transpose();
        }
        cov /= n_samples as f64;
        for i in 0..d {
            for j in 0..d {
                let corr = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
                assert!(
                    (corr - m.varrho()[(i, j)]).abs() < 0.02,
                    "corr[{i},{j}] = {corr} vs {}",
                    m.varrho()[(i, j)]
                );
            }
        }
    }

    #[test]
    fn coordinated_variation_keeps_cost_product_constant() {
        let m = MarketModel::coordinated_variation(0.031, 0.002, 1.0, 1.0, 1e-5).unwrap();
        assert_eq!(m.beta()[1], 2.0);
        assert_eq!(m.delta()[1], 1.0);
        assert_eq!(m.varrho()[(0, 1)], -1.0);
        let grid = TimeGrid::new(10.0, 200).unwrap();
        let paths = sample_paths(
            &m,
            &grid,
            &DVector::zeros(2),
            0,
            200,
            3,
            NoiseSource::Seeded(7),
        )
        .unwrap();
        let product0 = 0.031f64 * 0.031 * 0.002;
        for p in &paths {
            let mut moved = false;
            for (xi, st) in p.xi.iter().zip(&p.states) {
                // Manifold: xi2 = -2 xi1, exactly preserved by the exact
                // transition under the constrained parameters.
                assert!(
                    (xi[1] + 2.0 * xi[0]).abs() <= 1e-14 * xi[0].abs().max(1.0),
                    "manifold violated: {xi:?}"
                );
                let product =
                    st.covariance.as_matrix()[(0, 0)] * st.impact.as_matrix()[(0, 0)];
                assert_relative_eq!(product, product0, max_relative = 1e-10);
                moved |= xi[0] != 0.0;
            }
            assert!(moved, "path never left the initial state");
        }
    }

    #[test]
    fn block_source_consumes_time_major_coordinates() {
        let m = one_asset_model();
        let grid = TimeGrid::new(1.0, 4).unwrap();
        // 2 transitions × 2 drivers = 4 coordinates; row r = path r.
        let block = DMatrix::from_row_slice(
            2,
            4,
            &[
                1.0, -1.0, 0.5, 0.25, //
                0.0, 0.0, 0.0, 0.0,
            ],
        );
        let paths = sample_paths(
            &m,
            &grid,
            &DVector::zeros(2),
            1,
            3,
            2,
            NoiseSource::Block(&block),
        )
        .unwrap();
        assert_eq!(paths[0].start_step, 1);
        assert_eq!(paths[0].end_step(), 3);
        assert_eq!(paths[0].states.len(), 3);
        // Path with zero noise stays at the origin.
        for xi in &paths[1].xi {
            assert_eq!(xi.amax(), 0.0);
        }
        // First transition consumed the first d=2 coordinates.
        let coeffs = m.transition_coeffs(grid.dt());
        let mut expected = DVector::zeros(2);
        m.ou_step_into(&coeffs, &[1.0, -1.0], &mut expected);
        assert_relative_eq!(paths[0].xi[1][0], expected[0], max_relative = 1e-14);
        assert_relative_eq!(paths[0].xi[1][1], expected[1], max_relative = 1e-14);
    }

    #[test]
    fn block_too_small_is_rejected() {
        let m = one_asset_model();
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let block = DMatrix::zeros(2, 3);
        assert!(sample_paths(
            &m,
            &grid,
            &DVector::zeros(2),
            1,
            3,
            2,
            NoiseSource::Block(&block)
        )
        .is_err());
    }

    #[test]
    fn price_increments_have_left_point_covariance() {
        let m = one_asset_model();
        let grid = TimeGrid::new(10.0, 20).unwrap();
        let path = sample_paths(
            &m,
            &grid,
            &DVector::zeros(2),
            0,
            20,
            1,
            NoiseSource::Seeded(3),
        )
        .unwrap()
        .remove(0);
        // Many redraws of the price noise on one frozen path.
        let mut acc = 0.0;
        let reps = 4000;
        for s in 0..reps {
            let ds = sample_prices(&m, &grid, &path, 1000 + s).unwrap();
            acc += ds[(5, 0)] * ds[(5, 0)];
        }
        let var = acc / reps as f64;
        let expect = path.state(5).covariance.as_matrix()[(0, 0)] * grid.dt();
        assert!(
            (var / expect - 1.0).abs() < 0.1,
            "variance {var} vs expected {expect}"
        );
        // Determinism in the seed.
        assert_eq!(
            sample_prices(&m, &grid, &path, 42).unwrap(),
            sample_prices(&m, &grid, &path, 42).unwrap()
        );
    }

    #[test]
    fn validation_rejects_malformed_inputs() {
        // Wrong driver count.
        assert!(MarketModel::new(
            dvector![0.05],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0],
            dvector![1.0],
            DMatrix::identity(1, 1),
            0.0,
        )
        .is_err());
        // Driver correlation not PSD.
        assert!(MarketModel::new(
            dvector![0.05],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0, 1.0],
            dvector![1.0, 1.0],
            dmatrix![1.0, -1.5; -1.5, 1.0],
            0.0,
        )
        .is_err());
        // Negative lambda.
        assert!(MarketModel::new(
            dvector![0.05],
            dmatrix![0.002],
            DMatrix::identity(1, 1),
            dvector![1.0, 1.0],
            dvector![1.0, 1.0],
            DMatrix::identity(2, 2),
            -1.0,
        )
        .is_err());
        // Impact matrix not PD.
        assert!(MarketModel::new(
            dvector![0.05, 0.05],
            dmatrix![1.0, 2.0; 2.0, 1.0],
            DMatrix::identity(2, 2),
            DVector::from_element(5, 1.0),
            DVector::from_element(5, 1.0),
            DMatrix::identity(5, 5),
            0.0,
        )
        .is_err());
    }
}
