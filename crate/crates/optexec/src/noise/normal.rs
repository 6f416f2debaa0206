//! Inverse standard normal CDF.
//!
//! Rational-polynomial initial guess (Acklam's coefficients, three regions)
//! refined by one Halley step against an erfc-based CDF evaluation. The
//! refined value is accurate to ~1e-15 in the central region; in the far
//! tails the limit is the erfc kernel's own relative accuracy, observed
//! around 1e-11 absolute — two orders of magnitude inside the 1e-9
//! contract over p ∈ (1e-12, 1-1e-12).

use statrs::function::erf::erfc;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.5066282746310002;

const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

const P_LOW: f64 = 0.02425;

fn acklam_estimate(p: f64) -> f64 {
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Quantile x with Φ(x) = p, for p strictly inside (0, 1).
///
/// Panics on p outside (0, 1); block constructors guarantee open-interval
/// uniforms, so hitting the panic indicates a caller bug rather than a data
/// condition.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(
        p > 0.0 && p < 1.0,
        "inverse normal CDF defined on open (0,1), got {p}"
    );
    let x = acklam_estimate(p);
    // Residual Φ(x) − p, evaluated without cancellation on either tail:
    // for p ≥ 1/2 use Φ(x) − p = (1−p) − Φ̄(x) with Φ̄(x) = erfc(x/√2)/2.
    let e = if p < 0.5 {
        0.5 * erfc(-x / SQRT_2) - p
    } else {
        (1.0 - p) - 0.5 * erfc(x / SQRT_2)
    };
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    // One Halley step.
    x - u / (1.0 + 0.5 * x * u)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Reference quantiles frozen from an independent high-precision
    /// evaluation (30-digit arithmetic) of the quantile at the exact double
    /// nearest each decimal probability. The distinction only matters for the
    /// two extreme upper-tail rows, where 1−p loses relative accuracy to the
    /// literal's own rounding before the function is even called.
    const REFERENCE: [(f64, f64); 15] = [
        (1e-12, -7.0344838253011319),
        (1e-9, -5.9978070150076869),
        (1e-6, -4.7534243088228989),
        (1e-4, -3.7190164854556806),
        (0.01, -2.3263478740408411),
        (0.025, -1.9599639845400542),
        (0.1, -1.2815515655446005),
        (0.3, -0.52440051270804078),
        (0.5, 0.0),
        (0.7, 0.52440051270804078),
        (0.9, 1.2815515655446005),
        (0.975, 1.9599639845400542),
        (0.99, 2.3263478740408411),
        (0.999999, 4.7534243088170878),
        (0.999999999999, 7.0344869100478352),
    ];

    #[test]
    fn matches_reference_quantiles() {
        for &(p, x_ref) in REFERENCE.iter() {
            let x = inverse_normal_cdf(p);
            assert!(
                (x - x_ref).abs() < 1e-9,
                "p={p}: got {x}, want {x_ref}"
            );
            // The contract is 1e-9 absolute; the refinement does an order
            // of magnitude better even in the erfc-limited far tails.
            assert!(
                (x - x_ref).abs() <= 1e-10 * x_ref.abs().max(1.0),
                "p={p}: got {x}, want {x_ref}, diff {:.3e}",
                x - x_ref
            );
        }
    }

    #[test]
    fn symmetric_and_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..2000 {
            let p = i as f64 / 2000.0;
            let x = inverse_normal_cdf(p);
            assert!(x > prev, "not monotone at p={p}");
            prev = x;
            let mirrored = inverse_normal_cdf(1.0 - p);
            assert!((x + mirrored).abs() < 1e-13, "asymmetry at p={p}");
        }
    }

    #[test]
    fn round_trips_through_cdf() {
        for &(p, _) in REFERENCE.iter() {
            let x = inverse_normal_cdf(p);
            let back = if x <= 0.0 {
                0.5 * erfc(-x / SQRT_2)
            } else {
                1.0 - 0.5 * erfc(x / SQRT_2)
            };
            assert!(
                (back - p).abs() <= 1e-13 * p.max(1e-3),
                "round trip p={p} -> {back}"
            );
        }
    }

    #[test]
    #[should_panic(expected = "open (0,1)")]
    fn rejects_boundary() {
        inverse_normal_cdf(0.0);
    }
}
