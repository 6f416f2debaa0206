//! Matrix propagators of the deterministic mean-variance execution problem.
//!
//! With constant impact Ξ and covariance Σ over a window of length τ, the
//! optimal inventory follows x(s) = Ω(s)·x(0) where
//!
//! ```text
//!   Ω(s)  = sinh(C(τ−s)) · sinh(Cτ)⁻¹,
//!   Ω′(s) = −cosh(C(τ−s)) · sinh(Cτ)⁻¹ · C,        C² = λ Ξ⁻¹ Σ.
//! ```
//!
//! C is computed through the symmetrization S = λ Ξ^{−1/2} Σ Ξ^{−1/2} (S is
//! symmetric PSD, so its square root is well defined), giving
//! C = Ξ^{−1/2} S^{1/2} Ξ^{1/2}. Every matrix function of C shares the
//! eigenbasis of S, so a single factorization serves any number of
//! evaluations: Ω(s) = L · diag(ω(μ_i, s, τ)) · Rᵀ with L = Ξ^{−1/2}V,
//! Rᵀ = VᵀΞ^{1/2}, S = V diag(μ_i²) Vᵀ.
//!
//! The scalar kernels are written in decaying-exponential form so that
//! horizons with μτ in the hundreds neither overflow nor lose the exact
//! boundary values ω(0) = 1, ω(τ) = 0.

use nalgebra::{DMatrix, DVector};

use crate::spd::{sqrt_and_inv_sqrt, sym_eigen_sorted, SymPosDef};
use crate::{Error, Result};

/// Per-mode zero-frequency switch: below this value of (μτ)² the hyperbolic
/// ratio is replaced by its μ→0 limit (the risk-neutral linear schedule).
const FREQ_SWITCH_SQ: f64 = 1e-10;

/// Modes with μτ above this use pure-decay asymptotics implicitly via the
/// exponential form; nothing special is needed, the constant only documents
/// the regime the representation is built for.
const _LARGE_FREQ_OK: f64 = 700.0;

/// Dimensions up to this size avoid heap allocation in the evaluation hot
/// path.
const MAX_STACK_DIM: usize = 8;

/// Inventory kernel ω(μ, s, τ) = sinh(μ(τ−s)) / sinh(μτ) for local time
/// s ∈ [0, τ], evaluated overflow-safely. ω(0) = 1 and ω(τ) = 0 hold exactly.
pub fn omega_scalar(mu: f64, s: f64, tau: f64) -> f64 {
    debug_assert!(mu >= 0.0 && s >= 0.0 && s <= tau);
    if mu * mu * tau * tau < FREQ_SWITCH_SQ {
        return (tau - s) / tau;
    }
    // sinh ratio rewritten with decaying exponentials only:
    //   e^{−μs} · (1 − e^{−2μ(τ−s)}) / (1 − e^{−2μτ})
    (-mu * s).exp() * (-(-2.0 * mu * (tau - s)).exp_m1()) / (-(-2.0 * mu * tau).exp_m1())
}

/// Velocity kernel ω′(μ, s, τ) = −μ cosh(μ(τ−s)) / sinh(μτ), the s-derivative
/// of [`omega_scalar`]. Limit −1/τ as μ → 0.
pub fn omega_prime_scalar(mu: f64, s: f64, tau: f64) -> f64 {
    debug_assert!(mu >= 0.0 && s >= 0.0 && s <= tau);
    if mu * mu * tau * tau < FREQ_SWITCH_SQ {
        return -1.0 / tau;
    }
    -mu * (-mu * s).exp() * (1.0 + (-2.0 * mu * (tau - s)).exp()) / (-(-2.0 * mu * tau).exp_m1())
}

/// One factorization of a (Ξ, Σ, λ) triple over a fixed window length,
/// supporting repeated allocation-free evaluation of Ω and Ω′ at arbitrary
/// local times. This is the workhorse behind every strategy: rolling-horizon
/// steps build one basis per decision step, Monte Carlo continuation
/// estimators build one per scenario.
#[derive(Debug, Clone)]
pub struct PropagatorBasis {
    /// L = Ξ^{−1/2} V.
    left: DMatrix<f64>,
    /// Rᵀ = Vᵀ Ξ^{1/2}.
    right: DMatrix<f64>,
    /// Mode frequencies μ_i = sqrt(eigenvalues of λΞ⁻¹Σ), ascending.
    mu: DVector<f64>,
    /// Window length τ.
    horizon: f64,
}

impl PropagatorBasis {
    /// Factor the triple (Ξ, Σ, λ) for a window of length `horizon`.
    pub fn new(xi: &SymPosDef, sigma: &SymPosDef, lambda: f64, horizon: f64) -> Result<Self> {
        let n = xi.dim();
        if sigma.dim() != n {
            return Err(Error::DimensionMismatch {
                context: "propagator basis",
                expected: n,
                got: sigma.dim(),
            });
        }
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Config(format!(
                "risk aversion must be finite and nonnegative, got {lambda}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::TimeOutOfRange {
                context: "propagator basis",
                t: horizon,
                horizon,
            });
        }
        if n == 1 {
            // Scalar shortcut: μ² = λσ²/η, and the similarity transform is
            // trivial. Avoids two eigendecompositions per evaluation site.
            let eta = xi.as_matrix()[(0, 0)];
            let var = sigma.as_matrix()[(0, 0)];
            let mu = (lambda * var / eta).sqrt();
            return Ok(PropagatorBasis {
                left: DMatrix::identity(1, 1),
                right: DMatrix::identity(1, 1),
                mu: DVector::from_element(1, mu),
                horizon,
            });
        }
        let (sqrt_xi, inv_sqrt_xi) = sqrt_and_inv_sqrt(xi, "propagator basis")?;
        let mut s_mat = &inv_sqrt_xi * sigma.as_matrix() * &inv_sqrt_xi;
        s_mat *= lambda;
        let s_mat = (&s_mat + s_mat.transpose()) * 0.5;
        let (vals, vecs) = sym_eigen_sorted(&s_mat);
        // S is PSD by construction; clamp eigendecomposition roundoff.
        let mu = vals.map(|w| w.max(0.0).sqrt());
        Ok(PropagatorBasis {
            left: &inv_sqrt_xi * &vecs,
            right: vecs.transpose() * &sqrt_xi,
            mu,
            horizon,
        })
    }

    /// Matrix dimension n.
    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Window length τ the basis was built for.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Mode frequencies μ_i (ascending). μ_i² are the eigenvalues of λΞ⁻¹Σ.
    pub fn modes(&self) -> &DVector<f64> {
        &self.mu
    }

    fn check_time(&self, s: f64, context: &'static str) -> Result<()> {
        if !(s.is_finite() && (0.0..=self.horizon).contains(&s)) {
            return Err(Error::TimeOutOfRange {
                context,
                t: s,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// out = L · diag(f_i) · Rᵀ without allocating (for n ≤ 8).
    fn apply_diag(&self, f: &[f64], out: &mut DMatrix<f64>) {
        let n = self.dim();
        debug_assert_eq!(out.nrows(), n);
        debug_assert_eq!(out.ncols(), n);
        for j in 0..n {
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.left[(i, k)] * f[k] * self.right[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
    }

    fn eval_into(
        &self,
        s: f64,
        kernel: fn(f64, f64, f64) -> f64,
        out: &mut DMatrix<f64>,
        context: &'static str,
    ) -> Result<()> {
        self.check_time(s, context)?;
        let n = self.dim();
        if n <= MAX_STACK_DIM {
            let mut buf = [0.0f64; MAX_STACK_DIM];
            for i in 0..n {
                buf[i] = kernel(self.mu[i], s, self.horizon);
            }
            self.apply_diag(&buf[..n], out);
        } else {
            let f: Vec<f64> = (0..n).map(|i| kernel(self.mu[i], s, self.horizon)).collect();
            self.apply_diag(&f, out);
        }
        Ok(())
    }

    /// Write Ω(s) into `out` (n×n, preallocated).
    pub fn omega_into(&self, s: f64, out: &mut DMatrix<f64>) -> Result<()> {
        self.eval_into(s, omega_scalar, out, "omega")
    }

    /// Write Ω′(s) into `out` (n×n, preallocated).
    pub fn omega_prime_into(&self, s: f64, out: &mut DMatrix<f64>) -> Result<()> {
        self.eval_into(s, omega_prime_scalar, out, "omega_prime")
    }

    /// Allocate and return Ω(s).
    pub fn omega(&self, s: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        self.omega_into(s, &mut out)?;
        Ok(out)
    }

    /// Allocate and return Ω′(s).
    pub fn omega_prime(&self, s: f64) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        self.omega_prime_into(s, &mut out)?;
        Ok(out)
    }

    /// The generator C = Ξ^{−1/2} (λ Ξ^{−1/2} Σ Ξ^{−1/2})^{1/2} Ξ^{1/2},
    /// satisfying C² = λΞ⁻¹Σ.
    pub fn generator(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        let f: Vec<f64> = self.mu.iter().copied().collect();
        self.apply_diag(&f, &mut out);
        out
    }
}

/// Inventory and velocity propagators of one window, evaluated at one time.
#[derive(Debug, Clone)]
pub struct Propagator {
    /// Ω(t): maps the window's starting inventory to inventory at local time t.
    pub omega: DMatrix<f64>,
    /// Ω′(t): maps the window's starting inventory to velocity at local time t.
    pub omega_prime: DMatrix<f64>,
    /// Local evaluation time within the window.
    pub eval_time: f64,
    /// Window length.
    pub horizon: f64,
}

/// Matrix square root C of λΞ⁻¹Σ (the generally non-symmetric product),
/// computed through the symmetrized form.
pub fn mat_sqrt_product(xi: &SymPosDef, sigma: &SymPosDef, lambda: f64) -> Result<DMatrix<f64>> {
    // Horizon is irrelevant for C; any positive value factors the triple.
    Ok(PropagatorBasis::new(xi, sigma, lambda, 1.0)?.generator())
}

/// General propagator pair (Ω(t), Ω′(t)) for a window [0, t_end] with frozen
/// coefficients, evaluated at local time t ∈ [0, t_end].
pub fn propagator(
    t: f64,
    t_end: f64,
    xi: &SymPosDef,
    sigma: &SymPosDef,
    lambda: f64,
) -> Result<Propagator> {
    let basis = PropagatorBasis::new(xi, sigma, lambda, t_end)?;
    Ok(Propagator {
        omega: basis.omega(t)?,
        omega_prime: basis.omega_prime(t)?,
        eval_time: t,
        horizon: t_end,
    })
}

/// Two-asset closed form for the propagator pair, using the explicit
/// eigenstructure of the 2×2 matrix A = λΞ⁻¹Σ with entries a, b, c, d:
///
/// ```text
///   discriminant  D  = a² + 4bc − 2ad + d²  = (a−d)² + 4bc
///   frequencies   μ₁² = (a+d−√D)/2,  μ₂² = (a+d+√D)/2
///   mixing        θ₁ = (a−d−√D)/(2c),  θ₂ = (a−d+√D)/(2c)
/// ```
///
/// Degenerate combinations (D < 0, repeated frequencies, c ≈ 0, or a
/// non-positive lower frequency) return [`Error::DegenerateClosedForm`];
/// callers fall back to [`propagator`].
pub fn cc_2asset_closed_form(
    t: f64,
    t_end: f64,
    xi: &SymPosDef,
    sigma: &SymPosDef,
    lambda: f64,
) -> Result<Propagator> {
    if xi.dim() != 2 || sigma.dim() != 2 {
        return Err(Error::DimensionMismatch {
            context: "two-asset closed form",
            expected: 2,
            got: xi.dim().max(sigma.dim()),
        });
    }
    if !(t.is_finite() && (0.0..=t_end).contains(&t)) {
        return Err(Error::TimeOutOfRange {
            context: "two-asset closed form",
            t,
            horizon: t_end,
        });
    }
    let xim = xi.as_matrix();
    let sm = sigma.as_matrix();
    let det = xim[(0, 0)] * xim[(1, 1)] - xim[(0, 1)] * xim[(1, 0)];
    // A = λ Ξ⁻¹ Σ, entries a b / c d.
    let a = lambda / det * (xim[(1, 1)] * sm[(0, 0)] - xim[(0, 1)] * sm[(1, 0)]);
    let b = lambda / det * (xim[(1, 1)] * sm[(0, 1)] - xim[(0, 1)] * sm[(1, 1)]);
    let c = lambda / det * (xim[(0, 0)] * sm[(1, 0)] - xim[(1, 0)] * sm[(0, 0)]);
    let d = lambda / det * (xim[(0, 0)] * sm[(1, 1)] - xim[(1, 0)] * sm[(0, 1)]);
    let scale = a.abs().max(b.abs()).max(c.abs()).max(d.abs());
    if c.abs() <= 1e-14 * scale {
        return Err(Error::DegenerateClosedForm(
            "assets decouple (lower-left entry of λΞ⁻¹Σ vanishes)".into(),
        ));
    }
    let disc = a * a + 4.0 * b * c - 2.0 * a * d + d * d;
    if disc < 0.0 {
        return Err(Error::DegenerateClosedForm(format!(
            "negative discriminant {disc:.3e}"
        )));
    }
    let root = disc.sqrt();
    if root <= 1e-14 * scale {
        return Err(Error::DegenerateClosedForm("repeated frequencies".into()));
    }
    let mu1_sq = (a + d - root) / 2.0;
    let mu2_sq = (a + d + root) / 2.0;
    if mu1_sq <= 0.0 {
        return Err(Error::DegenerateClosedForm(format!(
            "non-positive squared frequency {mu1_sq:.3e}"
        )));
    }
    let (mu1, mu2) = (mu1_sq.sqrt(), mu2_sq.sqrt());
    let theta1 = (a - d - root) / (2.0 * c);
    let theta2 = (a - d + root) / (2.0 * c);

    let assemble = |f1: f64, f2: f64| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                theta1 * f1 - theta2 * f2,
                theta1 * theta2 * (f2 - f1),
                f1 - f2,
                theta1 * f2 - theta2 * f1,
            ],
        ) / (theta1 - theta2)
    };
    let s1 = omega_scalar(mu1, t, t_end);
    let s2 = omega_scalar(mu2, t, t_end);
    let sp1 = omega_prime_scalar(mu1, t, t_end);
    let sp2 = omega_prime_scalar(mu2, t, t_end);
    Ok(Propagator {
        omega: assemble(s1, s2),
        omega_prime: assemble(sp1, sp2),
        eval_time: t,
        horizon: t_end,
    })
}

/// 16-point Gauss–Legendre nodes and weights on [−1, 1].
const GL16: [(f64, f64); 16] = [
    (-0.9894009349916499, 0.027152459411754037),
    (-0.9445750230732326, 0.062253523938647706),
    (-0.8656312023878318, 0.09515851168249259),
    (-0.755404408355003, 0.12462897125553403),
    (-0.6178762444026438, 0.14959598881657676),
    (-0.45801677765722737, 0.16915651939500262),
    (-0.2816035507792589, 0.1826034150449236),
    (-0.09501250983763745, 0.18945061045506859),
    (0.09501250983763745, 0.18945061045506859),
    (0.2816035507792589, 0.1826034150449236),
    (0.45801677765722737, 0.16915651939500262),
    (0.6178762444026438, 0.14959598881657676),
    (0.755404408355003, 0.12462897125553403),
    (0.8656312023878318, 0.09515851168249259),
    (0.9445750230732326, 0.062253523938647706),
    (0.9894009349916499, 0.027152459411754037),
];

/// Relative Frobenius tolerance for the adaptive quadrature.
const QUAD_RTOL: f64 = 1e-10;

/// Panel-count cap for the adaptive quadrature.
const QUAD_MAX_PANELS: usize = 4096;

/// Quadratic cost-to-go matrix of the frozen-coefficient problem on [t, t_end]:
///
/// ```text
///   Q = ∫_t^{t_end} [ Ω′(s)ᵀ Ξ Ω′(s) + λ Ω(s)ᵀ Σ Ω(s) ] ds,
/// ```
///
/// so that x(t)ᵀ Q x(t) is the total expected cost of following the optimal
/// frozen-coefficient schedule from inventory x(t). Composite 16-node
/// Gauss–Legendre with panel doubling to a 1e-10 relative Frobenius tolerance.
pub fn cc_cost_matrix(
    t: f64,
    t_end: f64,
    xi: &SymPosDef,
    sigma: &SymPosDef,
    lambda: f64,
) -> Result<DMatrix<f64>> {
    if !(t.is_finite() && t >= 0.0 && t < t_end) {
        return Err(Error::TimeOutOfRange {
            context: "cost matrix",
            t,
            horizon: t_end,
        });
    }
    // Frozen coefficients make the window translation-invariant: only its
    // length matters. Build the closed form over the remaining length so the
    // quadratic form acts on the inventory held at the window start.
    let tau = t_end - t;
    let basis = PropagatorBasis::new(xi, sigma, lambda, tau)?;
    let n = basis.dim();
    let xim = xi.as_matrix();
    let sm = sigma.as_matrix();

    let mut om = DMatrix::zeros(n, n);
    let mut omp = DMatrix::zeros(n, n);
    let mut integrate = |panels: usize| -> Result<DMatrix<f64>> {
        let mut acc = DMatrix::zeros(n, n);
        let width = tau / panels as f64;
        for p in 0..panels {
            let lo = p as f64 * width;
            for &(node, weight) in GL16.iter() {
                let s = lo + width * 0.5 * (node + 1.0);
                basis.omega_into(s, &mut om)?;
                basis.omega_prime_into(s, &mut omp)?;
                let term = omp.transpose() * xim * &omp + (om.transpose() * sm * &om) * lambda;
                acc += term * (weight * width * 0.5);
            }
        }
        Ok(acc)
    };

    let mut panels = 1;
    let mut prev = integrate(panels)?;
    loop {
        panels *= 2;
        let next = integrate(panels)?;
        let diff = (&next - &prev).norm();
        let scale = next.norm().max(f64::MIN_POSITIVE);
        if diff <= QUAD_RTOL * scale {
            let sym = (&next + next.transpose()) * 0.5;
            return Ok(sym);
        }
        if panels >= QUAD_MAX_PANELS {
            return Err(Error::QuadratureNoConvergence(format!(
                "cost matrix at {panels} panels: rel change {:.3e}",
                diff / scale
            )));
        }
        prev = next;
    }
}
