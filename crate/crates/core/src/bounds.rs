//! Closed-form envelopes for the extreme-value functionals of persistent
//! fractional Brownian motion on `[0, a]`: moment and tail bounds for the
//! supremum `S` and the reflected supremum `M`, a Laplace-transform envelope
//! for level hitting times, a lower bound for the distribution of the
//! supremum-to-terminal gap, and the Gamma-integral identities used to
//! cross-check them.
//!
//! All quantities here are deterministic arithmetic; the Monte Carlo suites
//! in [`crate::verify`] measure how the simulated functionals relate to them.

use crate::error::{Error, Result};
use crate::grid::Hurst;
use crate::stats::integrate_zero_to_inf;
use statrs::function::gamma::gamma;

/// A probability-scale bound together with its raw (pre-clamping) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedBound {
    /// The usable bound, clamped to the probability scale.
    pub value: f64,
    /// The raw closed form before clamping.
    pub unclamped: f64,
}

fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NonPositive { name, value })
    }
}

fn require_persistent(hurst: Hurst) -> Result<Hurst> {
    if hurst.is_persistent() {
        Ok(hurst)
    } else {
        Err(Error::RequiresPersistence(hurst.value()))
    }
}

/// Claimed envelope `a^{2H}` for the second moment of the reflected supremum
/// over `[0, a]`, `H > 1/2`.
pub fn second_moment_bound(a: f64, hurst: Hurst) -> Result<f64> {
    let a = require_positive("horizon", a)?;
    let hurst = require_persistent(hurst)?;
    Ok(a.powf(hurst.two_h()))
}

/// Envelope `a^H` for the first moment of the supremum over `[0, a]`,
/// `H > 1/2`.
pub fn first_moment_bound(a: f64, hurst: Hurst) -> Result<f64> {
    let a = require_positive("horizon", a)?;
    let hurst = require_persistent(hurst)?;
    Ok(a.powf(hurst.value()))
}

/// First-moment tail envelope `min(1, a^H / x)` for `P(sup >= x)`, `H > 1/2`.
pub fn markov_tail_bound(a: f64, hurst: Hurst, x: f64) -> Result<ClampedBound> {
    let x = require_positive("threshold", x)?;
    let unclamped = first_moment_bound(a, hurst)? / x;
    Ok(ClampedBound {
        value: unclamped.min(1.0),
        unclamped,
    })
}

/// Sharper tail envelope `min(1, sqrt(2) a^H / (x sqrt(pi)))` for
/// `P(sup >= x)`, `H > 1/2`. Tighter than [`markov_tail_bound`] by the factor
/// `sqrt(2/pi)`.
pub fn refined_tail_bound(a: f64, hurst: Hurst, x: f64) -> Result<ClampedBound> {
    let x = require_positive("threshold", x)?;
    let a = require_positive("horizon", a)?;
    let hurst = require_persistent(hurst)?;
    let unclamped =
        std::f64::consts::SQRT_2 * a.powf(hurst.value()) / (x * std::f64::consts::PI.sqrt());
    Ok(ClampedBound {
        value: unclamped.min(1.0),
        unclamped,
    })
}

/// Envelope `exp(-a sqrt(2 lambda))` for the Laplace transform
/// `E[exp(-lambda T_a^{2H})]` of the level-`a` hitting time, valid for all
/// `H >= 1/2` and an equality in the Brownian case `H = 1/2`.
pub fn laplace_transform_bound(lambda: f64, a: f64) -> Result<f64> {
    let lambda = require_positive("lambda", lambda)?;
    let a = require_positive("level", a)?;
    Ok((-a * (2.0 * lambda).sqrt()).exp())
}

/// Lower envelope `max(0, 1 - sqrt(2) a^H / (y sqrt(pi)))` for the
/// distribution function `P(S - B_a <= y)` of the supremum-to-terminal gap,
/// `H > 1/2`.
pub fn gap_cdf_lower_bound(a: f64, hurst: Hurst, y: f64) -> Result<ClampedBound> {
    let y = require_positive("gap threshold", y)?;
    let refined = refined_tail_bound(a, hurst, y)?;
    let unclamped = 1.0 - refined.unclamped;
    Ok(ClampedBound {
        value: unclamped.max(0.0),
        unclamped,
    })
}

/// Gamma-integral identity: `int_0^inf x^{k-1} e^{-x/theta} / Gamma(k) dx`
/// evaluates to `theta^k`, for `k > 0`, `theta > 0`.
pub fn gamma_moment(k: f64, theta: f64) -> Result<f64> {
    let k = require_positive("shape", k)?;
    let theta = require_positive("scale", theta)?;
    Ok(theta.powf(k))
}

/// Numerically integrates the [`gamma_moment`] integrand on `(0, inf)` with a
/// double-exponential rule, as an independent cross-check of the closed form.
pub fn gamma_moment_quadrature(k: f64, theta: f64, rel_tol: f64) -> Result<f64> {
    let k = require_positive("shape", k)?;
    let theta = require_positive("scale", theta)?;
    let norm = gamma(k);
    integrate_zero_to_inf(|x| x.powf(k - 1.0) * (-x / theta).exp() / norm, rel_tol)
}

/// Fractional moment `E[T^{p/2}] = Gamma((2 + p) / 2) / lambda^{p/2}` of an
/// exponential variable `T` with rate `lambda`, for `p >= 0`.
pub fn exp_half_moment(p: f64, lambda: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(Error::NonPositive {
            name: "moment order",
            value: p,
        });
    }
    let lambda = require_positive("rate", lambda)?;
    Ok(gamma((2.0 + p) / 2.0) / lambda.powf(p / 2.0))
}

/// Envelope `sqrt(2/pi) ≈ 0.79788` for the expected supremum over `[0, 1]`
/// of a persistent path; the Brownian value attains it exactly.
pub fn expected_sup_unit_bound() -> f64 {
    (2.0 / std::f64::consts::PI).sqrt()
}
