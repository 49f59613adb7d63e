//! Deterministic statistical utilities: order-independent summation,
//! empirical moments and tails with confidence intervals, a two-sample
//! Kolmogorov–Smirnov test (optionally restricted to a right tail of the
//! real line), and a semi-infinite quadrature used to cross-check closed
//! forms.
//!
//! Every routine consumes its input in a fixed order and uses pairwise
//! summation, so results are bit-stable across runs and thread counts.

use crate::error::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal};

/// Minimum sample size per side for the two-sample KS test.
pub const KS_MIN_SAMPLES: usize = 100;

/// Pairwise (cascade) summation: deterministic for a fixed input order and
/// far more accurate than naive accumulation on long inputs.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Arithmetic mean via pairwise summation. Empty input yields NaN.
pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

/// Standard normal distribution function.
pub fn standard_normal_cdf(x: f64) -> f64 {
    standard_normal().cdf(x)
}

/// Standard normal upper tail `P(Z >= x)`.
pub fn standard_normal_sf(x: f64) -> f64 {
    standard_normal().sf(x)
}

/// Standard normal quantile function; requires `0 < p < 1`.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0 && p < 1.0) {
        return Err(Error::NotAProbability {
            name: "quantile level",
            value: p,
        });
    }
    Ok(standard_normal().inverse_cdf(p))
}

/// Two-sided critical value `z` with `P(|Z| <= z) = confidence`.
pub fn two_sided_z(confidence: f64) -> Result<f64> {
    if !(confidence.is_finite() && confidence > 0.0 && confidence < 1.0) {
        return Err(Error::NotAProbability {
            name: "confidence",
            value: confidence,
        });
    }
    normal_quantile(0.5 * (1.0 + confidence))
}

/// A sample moment with its standard error and a symmetric normal-theory
/// confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

/// Mean of `x^order` over the sample, with standard error and a two-sided
/// interval at the given confidence. Fractional orders require non-negative
/// samples.
pub fn empirical_moment(xs: &[f64], order: f64, confidence: f64) -> Result<MomentEstimate> {
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: xs.len(),
        });
    }
    let z = two_sided_z(confidence)?;
    let powered: Vec<f64> = if order == 1.0 {
        xs.to_vec()
    } else {
        xs.iter().map(|&x| x.powf(order)).collect()
    };
    let m = mean(&powered);
    let deviations: Vec<f64> = powered.iter().map(|&x| (x - m) * (x - m)).collect();
    let variance = pairwise_sum(&deviations) / (powered.len() - 1) as f64;
    let std_error = (variance / powered.len() as f64).sqrt();
    Ok(MomentEstimate {
        estimate: m,
        std_error,
        ci_low: m - z * std_error,
        ci_high: m + z * std_error,
        samples: xs.len(),
    })
}

/// An empirical probability with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: usize,
    pub samples: usize,
}

/// Wilson score interval for a binomial proportion; always within `[0, 1]`
/// and well behaved at the boundaries.
pub fn wilson_interval(successes: usize, samples: usize, confidence: f64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let z = two_sided_z(confidence)?;
    let n = samples as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

fn proportion_estimate(count: usize, samples: usize, confidence: f64) -> Result<TailEstimate> {
    let (ci_low, ci_high) = wilson_interval(count, samples, confidence)?;
    Ok(TailEstimate {
        estimate: count as f64 / samples as f64,
        ci_low,
        ci_high,
        count,
        samples,
    })
}

/// Empirical upper tail `P(X >= threshold)` with a Wilson interval.
pub fn empirical_tail(xs: &[f64], threshold: f64, confidence: f64) -> Result<TailEstimate> {
    let count = xs.iter().filter(|&&x| x >= threshold).count();
    proportion_estimate(count, xs.len(), confidence)
}

/// Empirical distribution function `P(X <= threshold)` with a Wilson
/// interval.
pub fn empirical_cdf(xs: &[f64], threshold: f64, confidence: f64) -> Result<TailEstimate> {
    let count = xs.iter().filter(|&&x| x <= threshold).count();
    proportion_estimate(count, xs.len(), confidence)
}

/// Sorted copy under the IEEE total order (deterministic for any input).
pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut out = xs.to_vec();
    out.sort_unstable_by(f64::total_cmp);
    out
}

/// Interpolated sample quantile (the common "type 7" rule) at level
/// `q in [0, 1]`.
pub fn quantile(xs: &[f64], q: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::NotAProbability {
            name: "quantile level",
            value: q,
        });
    }
    let s = sorted(xs);
    let pos = q * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let frac = pos - lo as f64;
    if lo + 1 < s.len() {
        Ok(s[lo] * (1.0 - frac) + s[lo + 1] * frac)
    } else {
        Ok(s[lo])
    }
}

/// Result of a two-sample Kolmogorov–Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Largest absolute difference between the two empirical CDFs over the
    /// compared range.
    pub statistic: f64,
    /// Asymptotic p-value with the effective-size correction
    /// `n m / (n + m)`.
    pub p_value: f64,
    pub effective_samples: f64,
}

/// Upper tail of the asymptotic Kolmogorov distribution,
/// `Q(t) = P(sup |Brownian bridge| > t)`.
pub fn kolmogorov_sf(t: f64) -> f64 {
    if t <= 0.0 || t.is_nan() {
        return 1.0;
    }
    if t < 1.18 {
        // Jacobi-theta form: converges fast for small t.
        let v = std::f64::consts::PI.powi(2) / (8.0 * t * t);
        let cdf = ((2.0 * std::f64::consts::PI).sqrt() / t)
            * ((-v).exp() + (-9.0 * v).exp() + (-25.0 * v).exp() + (-49.0 * v).exp());
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        // Alternating series: converges fast for large t.
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=64u32 {
            let term = (-2.0 * (k * k) as f64 * t * t).exp();
            sum += sign * term;
            sign = -sign;
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Largest absolute ECDF difference between two sorted samples, over all of
/// the real line or, when `lower` is given, over `[lower, inf)` only.
/// Handles ties and repeated values exactly.
fn ks_distance_sorted(a: &[f64], b: &[f64], lower: Option<f64>) -> f64 {
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let mut ia = 0usize;
    let mut ib = 0usize;
    let mut recorded_boundary = lower.is_none();
    let mut d = 0.0_f64;
    while ia < a.len() || ib < b.len() {
        let va = a.get(ia).copied().unwrap_or(f64::INFINITY);
        let vb = b.get(ib).copied().unwrap_or(f64::INFINITY);
        let v = va.min(vb);
        if let Some(l) = lower {
            if !recorded_boundary && v > l {
                // Every value <= l is consumed: the running counts give the
                // exact CDF difference at the boundary point itself.
                d = d.max((ia as f64 / na - ib as f64 / nb).abs());
                recorded_boundary = true;
            }
        }
        while ia < a.len() && a[ia] == v {
            ia += 1;
        }
        while ib < b.len() && b[ib] == v {
            ib += 1;
        }
        if lower.is_none_or(|l| v >= l) {
            d = d.max((ia as f64 / na - ib as f64 / nb).abs());
        }
    }
    d
}

fn ks_result(a_sorted: &[f64], b_sorted: &[f64], lower: Option<f64>) -> KsResult {
    let statistic = ks_distance_sorted(a_sorted, b_sorted, lower);
    let na = a_sorted.len() as f64;
    let nb = b_sorted.len() as f64;
    let effective_samples = na * nb / (na + nb);
    KsResult {
        statistic,
        p_value: kolmogorov_sf(effective_samples.sqrt() * statistic),
        effective_samples,
    }
}

/// Two-sample Kolmogorov–Smirnov test. Requires at least
/// [`KS_MIN_SAMPLES`] observations on each side (the p-value is asymptotic).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    let needed = KS_MIN_SAMPLES;
    if a.len() < needed || b.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: a.len().min(b.len()),
        });
    }
    Ok(ks_result(&sorted(a), &sorted(b), None))
}

/// Two-sample KS comparison restricted to thresholds `x >= lower`.
///
/// Sample entries below `lower` still feed the CDF levels (use
/// `f64::NEG_INFINITY` for observations known only to lie below the
/// restricted range, e.g. censored transforms); the supremum of the CDF
/// discrepancy is taken over the restricted range only, which makes the
/// full-range p-value conservative.
pub fn ks_two_sample_restricted(a: &[f64], b: &[f64], lower: f64) -> Result<KsResult> {
    let needed = KS_MIN_SAMPLES;
    if a.len() < needed || b.len() < needed {
        return Err(Error::TooFewSamples {
            needed,
            got: a.len().min(b.len()),
        });
    }
    if !lower.is_finite() {
        return Err(Error::EstimableRangeEmpty { lower });
    }
    Ok(ks_result(&sorted(a), &sorted(b), Some(lower)))
}

/// Integral of `f` over `(0, inf)` by the exp-sinh double-exponential rule
/// with successive halving until the relative change is below `rel_tol`.
/// Suitable for integrands with integrable endpoint singularities and
/// (super-)exponential decay, such as Gamma-type kernels.
pub fn integrate_zero_to_inf(f: impl Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    if !(rel_tol.is_finite() && rel_tol > 0.0 && rel_tol < 0.1) {
        return Err(Error::NonPositive {
            name: "relative tolerance",
            value: rel_tol,
        });
    }
    const T_MAX: f64 = 4.7;
    let eval = |t: f64| -> f64 {
        let u = std::f64::consts::FRAC_PI_2 * t.sinh();
        if u.abs() > 700.0 {
            return 0.0;
        }
        let x = u.exp();
        let y = f(x) * x * std::f64::consts::FRAC_PI_2 * t.cosh();
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };

    let mut h = 0.5;
    let mut total = eval(0.0);
    let mut k = 1;
    while k as f64 * h <= T_MAX {
        total += eval(k as f64 * h) + eval(-(k as f64) * h);
        k += 1;
    }
    let mut integral = total * h;
    for level in 0..14 {
        let h2 = h / 2.0;
        let mut mids = 0.0;
        let mut j = 0;
        loop {
            let t = (2 * j + 1) as f64 * h2;
            if t > T_MAX {
                break;
            }
            mids += eval(t) + eval(-t);
            j += 1;
        }
        let refined = 0.5 * integral + mids * h2;
        if level >= 2
            && (refined - integral).abs() <= rel_tol * refined.abs().max(f64::MIN_POSITIVE)
        {
            return Ok(refined);
        }
        integral = refined;
        h = h2;
    }
    Err(Error::QuadratureDidNotConverge { rel_tol })
}
