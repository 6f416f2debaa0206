//! Optimal trade execution under stochastic liquidity and volatility.
//!
//! The library prices the mean-variance execution problem
//!
//! ```text
//!   minimize  E[C] + λ·Var[C]  ≈  E ∫ [ v(t)ᵀ Ξ(t) v(t) + λ x(t)ᵀ Σ(t) x(t) ] dt
//! ```
//!
//! over liquidation schedules x(t) with x(0) = x₀ and x(T) = 0, where Ξ is the
//! (temporary) impact matrix, Σ the price covariance, and v = dx/dt the trading
//! velocity. Both Ξ and Σ are modulated by exponentials of correlated
//! Ornstein–Uhlenbeck drivers.
//!
//! Modules, bottom-up:
//!
//! * [`spd`], [`grid`] — shared small types (validated symmetric positive
//!   definite matrices, uniform time grids).
//! * [`propagator`] — hyperbolic-sine matrix propagators of the deterministic
//!   optimality system, the two-asset closed form, and the quadratic
//!   cost-to-go matrix.
//! * [`noise`] — reproducible noise: Sobol' low-discrepancy blocks with
//!   digital shifts, inverse-normal transform, and seeded pseudo-random
//!   blocks.
//! * [`market`] — the stochastic liquidity/volatility market model, exact
//!   driver transitions, and path sampling.
//! * [`strategies`] — static, rolling-horizon, and rolling-horizon Monte
//!   Carlo schedules.
//! * [`oracle`] — the a-posteriori discrete-optimal schedule (full-knowledge
//!   lower bound) and the rolling-horizon optimality residual.
//! * [`costeval`] — discretized cost functionals and aggregation.
//! * [`experiment`] — benchmark harness: configs, seed derivation, runners,
//!   and CSV/JSON outputs.

pub mod costeval;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod market;
pub mod noise;
pub mod oracle;
pub mod propagator;
pub mod spd;
pub mod strategies;
pub mod synthetic;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
