//! Monte Carlo verification suites: each suite estimates a path-functional
//! statistic from simulated ensembles and checks it against the matching
//! closed form, reporting a pass/fail/inconclusive verdict with the
//! confidence-interval slack documented on each check.
//!
//! Verdict semantics:
//! - an upper-bound claim passes when the CI upper endpoint is at or below
//!   the bound, fails when the CI lower endpoint exceeds it, and is
//!   inconclusive when the CI straddles it;
//! - lower-bound claims mirror that;
//! - equality claims pass when the target lies within the stated slack
//!   (either the report CI or three standard errors, per check);
//! - law-equality claims pass when the restricted two-sample KS test does
//!   not reject at significance `1 - confidence`.

use crate::bounds::{
    exp_half_moment, expected_sup_unit_bound, first_moment_bound, gap_cdf_lower_bound,
    laplace_transform_bound, markov_tail_bound, refined_tail_bound, second_moment_bound,
};
use crate::ensemble::{simulate_ensemble, Ensemble, Extent, SimulationConfig};
use crate::error::{Error, Result};
use crate::functionals::supremum;
use crate::generate::{path_from_increments, CirculantSampler};
use crate::grid::{ensemble_stream, Hurst, RngSpec, TimeGrid};
use crate::stats::{
    empirical_cdf, empirical_moment, empirical_tail, kolmogorov_sf, ks_two_sample_restricted,
    sorted, standard_normal_sf,
};
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

/// Minimum replication count for any suite that reports confidence
/// intervals.
pub const MIN_CI_SAMPLES: usize = 100;

/// Hitting-time claims are stated at unit level; by self-similarity this
/// loses no generality.
pub const HITTING_LEVEL: f64 = 1.0;

/// Hard cap, in multiples of the mean, for exponential horizon draws;
/// larger draws are rejected and redrawn (the redraw count is reported).
pub const EXP_HORIZON_CAP_MEANS: f64 = 50.0;

// Stream families: one id per independent ensemble so that every suite's
// randomness is a pure function of (master seed, ensemble id, replication).
const ENSEMBLE_BM_SANITY: u32 = 10;
const ENSEMBLE_IDENTITY_WINDOW: u32 = 20;
const ENSEMBLE_IDENTITY_HITTING: u32 = 21;
const ENSEMBLE_MOMENT: u32 = 30;
const ENSEMBLE_TAILS: u32 = 40;
const ENSEMBLE_LAPLACE: u32 = 50;
const ENSEMBLE_EXPSUP_T_BASE: u32 = 600;
const ENSEMBLE_EXPSUP_PATH_BASE: u32 = 700;
const ENSEMBLE_GAP: u32 = 80;
pub(crate) const ENSEMBLE_RISK: u32 = 90;
pub(crate) const ENSEMBLE_RISK_BM: u32 = 91;

/// Outcome of one verified claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Empirical side of a report: point estimate with its interval. For KS
/// reports the three fields coincide (the statistic is deterministic given
/// the ensembles).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Empirical {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Analytic side of a report. For probability bounds `clamped` is the bound
/// cut to `[0, 1]` and `unclamped` the raw expression; for KS reports
/// `clamped` is the critical statistic at the configured significance and
/// `unclamped` the p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Analytic {
    pub clamped: f64,
    pub unclamped: f64,
}

/// One verified claim: what was estimated, what it was compared against,
/// and the verdict.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub claim_id: String,
    pub params: SimulationConfig,
    pub empirical: Empirical,
    pub analytic: Analytic,
    pub verdict: Verdict,
    pub samples_used: usize,
    pub censored_count: usize,
    pub seed: u64,
    /// Wall-clock seconds for the suite that produced this report; excluded
    /// from the determinism contract.
    pub runtime_seconds: f64,
}

/// Pass iff the CI lies at or below the bound; fail iff it lies strictly
/// above; inconclusive when it straddles.
pub fn upper_bound_verdict(ci_low: f64, ci_high: f64, bound: f64) -> Verdict {
    if ci_high <= bound {
        Verdict::Pass
    } else if ci_low > bound {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// Pass iff the CI lies at or above the bound; fail iff strictly below.
pub fn lower_bound_verdict(ci_low: f64, ci_high: f64, bound: f64) -> Verdict {
    if ci_low >= bound {
        Verdict::Pass
    } else if ci_high < bound {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

fn equality_within_ci(ci_low: f64, ci_high: f64, target: f64) -> Verdict {
    if ci_low <= target && target <= ci_high {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn equality_within_3se(estimate: f64, std_error: f64, target: f64) -> Verdict {
    if (estimate - target).abs() <= 3.0 * std_error {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Critical KS statistic: the smallest statistic rejected at significance
/// `alpha` for the given effective sample size.
pub fn kolmogorov_critical(alpha: f64, effective_samples: f64) -> f64 {
    let (mut lo, mut hi) = (1e-6_f64, 8.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / effective_samples.sqrt()
}

/// Largest value of `F_a(x) - F_b(x)` over all thresholds `x` (signed, not
/// absolute). Inputs must be sorted. Equals zero when `a` stochastically
/// dominates `b` samplewise, strictly positive when domination fails.
fn signed_max_cdf_difference(a: &[f64], b: &[f64]) -> f64 {
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let (mut ia, mut ib) = (0usize, 0usize);
    // Below the smallest sample both CDFs vanish, so zero is always attained.
    let mut best = 0.0_f64;
    while ia < a.len() || ib < b.len() {
        let va = a.get(ia).copied().unwrap_or(f64::INFINITY);
        let vb = b.get(ib).copied().unwrap_or(f64::INFINITY);
        let v = va.min(vb);
        while ia < a.len() && a[ia] == v {
            ia += 1;
        }
        while ib < b.len() && b[ib] == v {
            ib += 1;
        }
        best = best.max(ia as f64 / na - ib as f64 / nb);
    }
    best
}

fn require_persistent_config(config: &SimulationConfig) -> Result<()> {
    if config.hurst.is_persistent() {
        Ok(())
    } else {
        Err(Error::RequiresPersistence(config.hurst.value()))
    }
}

/// Caches simulated ensembles so suites that share one (e.g. the two tail
/// suites) reuse it within a run. Reports are identical whether suites run
/// individually or together because every ensemble's streams are fixed by
/// its id.
pub struct SuiteRunner<'a> {
    config: &'a SimulationConfig,
    ensembles: HashMap<(u32, Extent), Arc<Ensemble>>,
}

impl<'a> SuiteRunner<'a> {
    pub fn new(config: &'a SimulationConfig) -> Result<Self> {
        config.validate()?;
        if config.paths < MIN_CI_SAMPLES {
            return Err(Error::TooFewSamples {
                needed: MIN_CI_SAMPLES,
                got: config.paths,
            });
        }
        Ok(Self {
            config,
            ensembles: HashMap::new(),
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        self.config
    }

    pub(crate) fn ensemble(&mut self, id: u32, extent: Extent) -> Result<Arc<Ensemble>> {
        if let Some(e) = self.ensembles.get(&(id, extent)) {
            return Ok(Arc::clone(e));
        }
        let e = Arc::new(simulate_ensemble(self.config, id, extent)?);
        self.ensembles.insert((id, extent), Arc::clone(&e));
        Ok(e)
    }
}

pub(crate) fn make_report(
    config: &SimulationConfig,
    claim_id: String,
    empirical: Empirical,
    analytic: Analytic,
    verdict: Verdict,
    samples_used: usize,
    censored_count: usize,
) -> VerificationReport {
    VerificationReport {
        claim_id,
        params: config.clone(),
        empirical,
        analytic,
        verdict,
        samples_used,
        censored_count,
        seed: config.master_seed,
        runtime_seconds: 0.0,
    }
}

fn stamp_runtime(reports: &mut [VerificationReport], seconds: f64) {
    for r in reports {
        r.runtime_seconds = seconds;
    }
}

fn timed(
    config: &SimulationConfig,
    f: impl FnOnce(&mut SuiteRunner) -> Result<Vec<VerificationReport>>,
) -> Result<Vec<VerificationReport>> {
    let mut runner = SuiteRunner::new(config)?;
    let started = Instant::now();
    let mut reports = f(&mut runner)?;
    stamp_runtime(&mut reports, started.elapsed().as_secs_f64());
    Ok(reports)
}

fn second_moment_impl(runner: &mut SuiteRunner) -> Result<Vec<VerificationReport>> {
    let config = runner.config;
    require_persistent_config(config)?;
    let ens = runner.ensemble(ENSEMBLE_MOMENT, Extent::Horizon)?;
    let moment = empirical_moment(&ens.reflected_sups(), 2.0, config.confidence)?;
    let bound = second_moment_bound(config.horizon, config.hurst)?;
    let verdict = upper_bound_verdict(moment.ci_low, moment.ci_high, bound);
    Ok(vec![make_report(
        config,
        "thm1-moment".to_string(),
        Empirical {
            estimate: moment.estimate,
            ci_low: moment.ci_low,
            ci_high: moment.ci_high,
        },
        Analytic {
            clamped: bound,
            unclamped: bound,
        },
        verdict,
        ens.len(),
        0,
    )])
}

fn tails_impl(runner: &mut SuiteRunner) -> Result<Vec<VerificationReport>> {
    let config = runner.config;
    require_persistent_config(config)?;
    let ens = runner.ensemble(ENSEMBLE_TAILS, Extent::Horizon)?;
    let sups = ens.sups();
    let reflected = ens.reflected_sups();
    let mut out = Vec::new();
    for &x in &config.x_grid {
        let markov = markov_tail_bound(config.horizon, config.hurst, x)?;
        let m_tail = empirical_tail(&reflected, x, config.confidence)?;
        out.push(make_report(
            config,
            format!("corollary-tail[x={x}]"),
            Empirical {
                estimate: m_tail.estimate,
                ci_low: m_tail.ci_low,
                ci_high: m_tail.ci_high,
            },
            Analytic {
                clamped: markov.value,
                unclamped: markov.unclamped,
            },
            upper_bound_verdict(m_tail.ci_low, m_tail.ci_high, markov.value),
            ens.len(),
            0,
        ));

        let refined = refined_tail_bound(config.horizon, config.hurst, x)?;
        let s_tail = empirical_tail(&sups, x, config.confidence)?;
        out.push(make_report(
            config,
            format!("thm2-tail[x={x}]"),
            Empirical {
                estimate: s_tail.estimate,
                ci_low: s_tail.ci_low,
                ci_high: s_tail.ci_high,
            },
            Analytic {
                clamped: refined.value,
                unclamped: refined.unclamped,
            },
            upper_bound_verdict(s_tail.ci_low, s_tail.ci_high, refined.value),
            ens.len(),
            0,
        ));

        // The reflected supremum dominates the one-sided supremum on every
        // path, so this paired ordering of tails is deterministic.
        let ordering = m_tail.estimate - s_tail.estimate;
        let verdict = if ordering >= 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        out.push(make_report(
            config,
            format!("tail-ordering[x={x}]"),
            Empirical {
                estimate: ordering,
                ci_low: ordering,
                ci_high: ordering,
            },
            Analytic {
                clamped: 0.0,
                unclamped: 0.0,
            },
            verdict,
            ens.len(),
            0,
        ));
    }
    let mean_sup = empirical_moment(&sups, 1.0, config.confidence)?;
    let bound = expected_sup_unit_bound() * first_moment_bound(config.horizon, config.hurst)?;
    out.push(make_report(
        config,
        "thm2-expected-sup".to_string(),
        Empirical {
            estimate: mean_sup.estimate,
            ci_low: mean_sup.ci_low,
            ci_high: mean_sup.ci_high,
        },
        Analytic {
            clamped: bound,
            unclamped: bound,
        },
        upper_bound_verdict(mean_sup.ci_low, mean_sup.ci_high, bound),
        ens.len(),
        0,
    ));
    Ok(out)
}

fn identity_impl(runner: &mut SuiteRunner, reflected: bool) -> Result<Vec<VerificationReport>> {
    let config = runner.config;
    let window = runner.ensemble(ENSEMBLE_IDENTITY_WINDOW, Extent::Horizon)?;
    let hitting = runner.ensemble(ENSEMBLE_IDENTITY_HITTING, Extent::CensorHorizon)?;
    let functional_side = if reflected {
        window.reflected_sups_squared()
    } else {
        window.sups_squared()
    };
    let hitting_side = hitting.hitting_transform(reflected);
    let lower = hitting.estimable_lower_bound();
    let ks = ks_two_sample_restricted(&functional_side, &hitting_side, lower)?;
    let alpha = config.alpha();
    let critical = kolmogorov_critical(alpha, ks.effective_samples);
    let verdict = if ks.p_value > alpha {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let claim = if reflected {
        "thm1-identity-reflected"
    } else {
        "thm1-identity-onesided"
    };
    let mut out = vec![make_report(
        config,
        claim.to_string(),
        Empirical {
            estimate: ks.statistic,
            ci_low: ks.statistic,
            ci_high: ks.statistic,
        },
        Analytic {
            clamped: critical,
            unclamped: ks.p_value,
        },
        verdict,
        window.len(),
        hitting.censored_count(reflected),
    )];
    if !reflected {
        // Paired CDF domination: the squared reflected supremum dominates
        // the squared one-sided supremum on every path, so the signed CDF
        // gap is exactly non-positive; any positive value is a defect.
        let dominated = signed_max_cdf_difference(
            &sorted(&window.reflected_sups_squared()),
            &sorted(&window.sups_squared()),
        );
        let verdict = if dominated <= 0.0 {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        out.push(make_report(
            config,
            "eq13-cdf-domination".to_string(),
            Empirical {
                estimate: dominated,
                ci_low: dominated,
                ci_high: dominated,
            },
            Analytic {
                clamped: 0.0,
                unclamped: 0.0,
            },
            verdict,
            window.len(),
            0,
        ));
    }
    Ok(out)
}

fn laplace_impl(runner: &mut SuiteRunner) -> Result<Vec<VerificationReport>> {
    let config = runner.config;
    if !(config.hurst.is_persistent() || config.hurst.is_brownian()) {
        return Err(Error::RequiresPersistence(config.hurst.value()));
    }
    let ens = runner.ensemble(ENSEMBLE_LAPLACE, Extent::CensorHorizon)?;
    let censored = ens.censored_count(false);
    let mut out = Vec::new();
    for &lambda in &config.lambda_grid {
        let samples = ens.laplace_samples(lambda)?;
        let moment = empirical_moment(&samples, 1.0, config.confidence)?;
        let bound = laplace_transform_bound(lambda, HITTING_LEVEL)?;
        // At the Brownian point the transform is an exact identity, so the
        // check becomes equality-within-CI instead of an upper bound.
        let verdict = if config.hurst.is_brownian() {
            equality_within_ci(moment.ci_low, moment.ci_high, bound)
        } else {
            upper_bound_verdict(moment.ci_low, moment.ci_high, bound)
        };
        out.push(make_report(
            config,
            format!("eq15-laplace[lambda={lambda}]"),
            Empirical {
                estimate: moment.estimate,
                ci_low: moment.ci_low,
                ci_high: moment.ci_high,
            },
            Analytic {
                clamped: bound,
                unclamped: bound,
            },
            verdict,
            ens.len(),
            censored,
        ));
    }
    Ok(out)
}

fn expsup_impl(
    config: &SimulationConfig,
    rate: f64,
    rate_index: u32,
) -> Result<Vec<VerificationReport>> {
    require_persistent_config(config)?;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::NonPositive {
            name: "exponential rate",
            value: rate,
        });
    }
    let cap = EXP_HORIZON_CAP_MEANS / rate;
    let steps_per_unit = config.steps_per_unit();
    let hurst = config.hurst;
    let two_h = hurst.two_h();
    let exp_dist = Exp::new(rate).map_err(|_| Error::NonPositive {
        name: "exponential rate",
        value: rate,
    })?;
    let rows = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let mut horizon_rng = RngSpec::new(
                config.master_seed,
                ensemble_stream(ENSEMBLE_EXPSUP_T_BASE + rate_index, i as u32),
            )
            .rng();
            let mut redraws = 0u32;
            let mut t = exp_dist.sample(&mut horizon_rng);
            while t > cap {
                redraws += 1;
                t = exp_dist.sample(&mut horizon_rng);
            }
            let horizon = t.powf(1.0 / two_h);
            let steps = ((horizon * steps_per_unit).ceil() as usize).max(16);
            let grid = TimeGrid::new(horizon, steps)?;
            let sampler = CirculantSampler::new(grid, hurst)?;
            let mut path_rng = RngSpec::new(
                config.master_seed,
                ensemble_stream(ENSEMBLE_EXPSUP_PATH_BASE + rate_index, i as u32),
            )
            .rng();
            let increments = sampler.sample_increments(&mut path_rng);
            let path = path_from_increments(grid, hurst, &increments)?;
            Ok((supremum(&path), t.sqrt(), redraws))
        })
        .collect::<Result<Vec<_>>>()?;
    let sups: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sqrt_horizons: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let redraws: usize = rows.iter().map(|r| r.2 as usize).sum();

    let mean_sup = empirical_moment(&sups, 1.0, config.confidence)?;
    let bound = 1.0 / (2.0 * rate).sqrt();
    let mut out = vec![make_report(
        config,
        format!("thm2-expsup-mean[lambda={rate}]"),
        Empirical {
            estimate: mean_sup.estimate,
            ci_low: mean_sup.ci_low,
            ci_high: mean_sup.ci_high,
        },
        Analytic {
            clamped: bound,
            unclamped: bound,
        },
        upper_bound_verdict(mean_sup.ci_low, mean_sup.ci_high, bound),
        config.paths,
        redraws,
    )];

    let mean_sqrt = empirical_moment(&sqrt_horizons, 1.0, config.confidence)?;
    let target = exp_half_moment(1.0, rate)?;
    out.push(make_report(
        config,
        format!("thm2-expsup-sqrt-horizon[lambda={rate}]"),
        Empirical {
            estimate: mean_sqrt.estimate,
            ci_low: mean_sqrt.ci_low,
            ci_high: mean_sqrt.ci_high,
        },
        Analytic {
            clamped: target,
            unclamped: target,
        },
        equality_within_3se(mean_sqrt.estimate, mean_sqrt.std_error, target),
        config.paths,
        redraws,
    ));
    Ok(out)
}

fn gap_impl(runner: &mut SuiteRunner) -> Result<Vec<VerificationReport>> {
    let config = runner.config;
    require_persistent_config(config)?;
    let ens = runner.ensemble(ENSEMBLE_GAP, Extent::Horizon)?;
    let gaps = ens.gaps();
    let mut out = Vec::new();
    for &y in &config.y_grid {
        let cdf = empirical_cdf(&gaps, y, config.confidence)?;
        let bound = gap_cdf_lower_bound(config.horizon, config.hurst, y)?;
        out.push(make_report(
            config,
            format!("thm3-gap[y={y}]"),
            Empirical {
                estimate: cdf.estimate,
                ci_low: cdf.ci_low,
                ci_high: cdf.ci_high,
            },
            Analytic {
                clamped: bound.value,
                unclamped: bound.unclamped,
            },
            lower_bound_verdict(cdf.ci_low, cdf.ci_high, bound.value),
            ens.len(),
            0,
        ));
    }
    Ok(out)
}

/// Threshold set for the Brownian pipeline check (fixed by the oracle, not
/// taken from `x_grid`).
const BM_SANITY_THRESHOLDS: [f64; 3] = [0.5, 1.0, 2.0];

fn bm_sanity_impl(runner: &mut SuiteRunner) -> Result<Vec<VerificationReport>> {
    let config = runner.config;
    if !config.hurst.is_brownian() {
        return Err(Error::RequiresBrownian(config.hurst.value()));
    }
    let ens = runner.ensemble(ENSEMBLE_BM_SANITY, Extent::Horizon)?;
    let sups = ens.sups();
    let sqrt_horizon = config.horizon.sqrt();
    let mut out = Vec::new();
    for &x in &BM_SANITY_THRESHOLDS {
        // Reflection principle: P(sup over [0,a] >= x) = 2 P(B_a >= x).
        let target = 2.0 * standard_normal_sf(x / sqrt_horizon);
        let tail = empirical_tail(&sups, x, config.confidence)?;
        let se = (tail.estimate * (1.0 - tail.estimate) / tail.samples as f64).sqrt();
        out.push(make_report(
            config,
            format!("bm-sanity-tail[x={x}]"),
            Empirical {
                estimate: tail.estimate,
                ci_low: tail.ci_low,
                ci_high: tail.ci_high,
            },
            Analytic {
                clamped: target,
                unclamped: target,
            },
            equality_within_3se(tail.estimate, se, target),
            ens.len(),
            0,
        ));
    }
    let mean_sup = empirical_moment(&sups, 1.0, config.confidence)?;
    let target = (2.0 / std::f64::consts::PI).sqrt() * sqrt_horizon;
    out.push(make_report(
        config,
        "bm-sanity-mean-sup".to_string(),
        Empirical {
            estimate: mean_sup.estimate,
            ci_low: mean_sup.ci_low,
            ci_high: mean_sup.ci_high,
        },
        Analytic {
            clamped: target,
            unclamped: target,
        },
        equality_within_3se(mean_sup.estimate, mean_sup.std_error, target),
        ens.len(),
        0,
    ));
    Ok(out)
}

/// Empirical expectation of the reflected supremum squared compared against
/// the claimed upper bound. The claim requires a persistent Hurst parameter
/// and is rejected otherwise.
pub fn verify_second_moment(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, second_moment_impl)
}

/// Tail-probability checks for both suprema against their closed-form
/// bounds, the deterministic paired tail ordering, and the expected-supremum
/// bound.
pub fn verify_tail_bounds(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, tails_impl)
}

/// Law equality between the squared reflected supremum and the transformed
/// level-1 hitting time of the reflected process, tested on the estimable
/// threshold range.
pub fn verify_law_identity_reflected(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, |r| identity_impl(r, true))
}

/// Law equality between the squared one-sided supremum and the transformed
/// level-1 hitting time, plus the paired CDF-domination check.
pub fn verify_law_identity_onesided(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, |r| identity_impl(r, false))
}

/// Conservative estimate of the hitting-time Laplace-type transform against
/// its exponential bound; at the Brownian point the bound is an identity and
/// the check becomes equality-within-CI.
pub fn verify_laplace_bound(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, laplace_impl)
}

/// Expected supremum over an independent exponentially-tilted horizon: mean
/// supremum against `1/sqrt(2 rate)` plus the square-root-horizon moment
/// cross-check.
pub fn verify_exponential_sup(
    config: &SimulationConfig,
    exp_horizon_rate: f64,
) -> Result<Vec<VerificationReport>> {
    config.validate()?;
    if config.paths < MIN_CI_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_CI_SAMPLES,
            got: config.paths,
        });
    }
    let index = config
        .lambda_grid
        .iter()
        .position(|&l| l == exp_horizon_rate)
        .unwrap_or(0) as u32;
    let started = Instant::now();
    let mut reports = expsup_impl(config, exp_horizon_rate, index)?;
    stamp_runtime(&mut reports, started.elapsed().as_secs_f64());
    Ok(reports)
}

/// Distribution-function lower bound for the terminal gap at each threshold
/// in `y_grid`.
pub fn verify_gap_bound(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, gap_impl)
}

/// End-to-end pipeline check against exact Brownian theory (reflection
/// principle); requires the Brownian Hurst parameter.
pub fn bm_sanity_suite(config: &SimulationConfig) -> Result<Vec<VerificationReport>> {
    timed(config, bm_sanity_impl)
}

/// Named verification suites exposed by the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Thm1Identity,
    Thm1Moment,
    CorollaryTail,
    Thm2Tail,
    Thm2Expsup,
    Eq15Laplace,
    Thm3Gap,
    BmSanity,
    RiskReport,
}

/// Valid suite names for error messages.
pub const SUITE_LIST: &str = "thm1-identity, thm1-moment, corollary-tail, thm2-tail, \
     thm2-expsup, eq15-laplace, thm3-gap, bm-sanity, risk-report, all";

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Thm1Identity => "thm1-identity",
            Suite::Thm1Moment => "thm1-moment",
            Suite::CorollaryTail => "corollary-tail",
            Suite::Thm2Tail => "thm2-tail",
            Suite::Thm2Expsup => "thm2-expsup",
            Suite::Eq15Laplace => "eq15-laplace",
            Suite::Thm3Gap => "thm3-gap",
            Suite::BmSanity => "bm-sanity",
            Suite::RiskReport => "risk-report",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "thm1-identity" => Ok(Suite::Thm1Identity),
            "thm1-moment" => Ok(Suite::Thm1Moment),
            "corollary-tail" => Ok(Suite::CorollaryTail),
            "thm2-tail" => Ok(Suite::Thm2Tail),
            "thm2-expsup" => Ok(Suite::Thm2Expsup),
            "eq15-laplace" => Ok(Suite::Eq15Laplace),
            "thm3-gap" => Ok(Suite::Thm3Gap),
            "bm-sanity" => Ok(Suite::BmSanity),
            "risk-report" => Ok(Suite::RiskReport),
            other => Err(Error::UnknownSuite(other.to_string(), SUITE_LIST)),
        }
    }

    /// Suites whose domain preconditions the given Hurst parameter
    /// satisfies: the law identities run for any H, the bound suites
    /// require persistence, the Laplace identity also admits the Brownian
    /// point, and the Brownian sanity suite requires exactly that point.
    pub fn all_for(hurst: Hurst) -> Vec<Suite> {
        let mut out = vec![Suite::Thm1Identity];
        if hurst.is_persistent() {
            out.extend([
                Suite::Thm1Moment,
                Suite::CorollaryTail,
                Suite::Thm2Tail,
                Suite::Thm2Expsup,
                Suite::Thm3Gap,
            ]);
        }
        if hurst.is_persistent() || hurst.is_brownian() {
            out.push(Suite::Eq15Laplace);
            out.push(Suite::RiskReport);
        }
        if hurst.is_brownian() {
            out.push(Suite::BmSanity);
        }
        out
    }
}

/// Parses a comma-separated suite list; `all` expands to every suite whose
/// precondition the configured Hurst parameter satisfies. Naming a suite
/// whose precondition fails is rejected here, before any simulation.
pub fn parse_suites(input: &str, hurst: Hurst) -> Result<Vec<Suite>> {
    let admissible = Suite::all_for(hurst);
    let mut out: Vec<Suite> = Vec::new();
    let push = |s: Suite, out: &mut Vec<Suite>| {
        if !out.contains(&s) {
            out.push(s);
        }
    };
    for token in input.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if token == "all" {
            for s in admissible.iter().copied() {
                push(s, &mut out);
            }
        } else {
            let suite = Suite::from_name(token)?;
            if !admissible.contains(&suite) {
                return Err(if suite == Suite::BmSanity {
                    Error::RequiresBrownian(hurst.value())
                } else {
                    Error::RequiresPersistence(hurst.value())
                });
            }
            push(suite, &mut out);
        }
    }
    if out.is_empty() {
        return Err(Error::UnknownSuite(input.to_string(), SUITE_LIST));
    }
    Ok(out)
}

fn run_one(runner: &mut SuiteRunner, suite: Suite) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let mut reports = match suite {
        Suite::Thm1Identity => {
            let mut v = identity_impl(runner, true)?;
            v.extend(identity_impl(runner, false)?);
            v
        }
        Suite::Thm1Moment => second_moment_impl(runner)?,
        Suite::CorollaryTail => tails_impl(runner)?
            .into_iter()
            .filter(|r| {
                r.claim_id.starts_with("corollary-tail") || r.claim_id.starts_with("tail-ordering")
            })
            .collect(),
        Suite::Thm2Tail => tails_impl(runner)?
            .into_iter()
            .filter(|r| r.claim_id.starts_with("thm2-"))
            .collect(),
        Suite::Thm2Expsup => {
            let mut v = Vec::new();
            for (i, &rate) in runner.config.lambda_grid.clone().iter().enumerate() {
                v.extend(expsup_impl(runner.config, rate, i as u32)?);
            }
            v
        }
        Suite::Eq15Laplace => laplace_impl(runner)?,
        Suite::Thm3Gap => gap_impl(runner)?,
        Suite::BmSanity => bm_sanity_impl(runner)?,
        Suite::RiskReport => crate::risk::risk_verification_reports(runner)?,
    };
    stamp_runtime(&mut reports, started.elapsed().as_secs_f64());
    Ok(reports)
}

/// Runs the given suites in order against one configuration, reusing shared
/// ensembles, and returns every report produced.
pub fn run_suites(config: &SimulationConfig, suites: &[Suite]) -> Result<Vec<VerificationReport>> {
    let mut runner = SuiteRunner::new(config)?;
    let mut reports = Vec::new();
    for &suite in suites {
        reports.extend(run_one(&mut runner, suite)?);
    }
    Ok(reports)
}

/// Exit status for a report set: 0 when everything passes, 2 on any
/// failure, 3 when the only non-passes are inconclusive.
pub fn overall_exit_code(reports: &[VerificationReport]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        2
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        3
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(hurst: f64, seed: u64) -> SimulationConfig {
        let mut cfg = SimulationConfig::new(Hurst::new(hurst).unwrap(), seed);
        cfg.steps = 128;
        cfg.paths = 300;
        cfg
    }

    #[test]
    fn verdict_builders_cover_all_cases() {
        assert_eq!(upper_bound_verdict(0.1, 0.2, 0.3), Verdict::Pass);
        assert_eq!(upper_bound_verdict(0.1, 0.2, 0.2), Verdict::Pass);
        assert_eq!(upper_bound_verdict(0.25, 0.4, 0.2), Verdict::Fail);
        assert_eq!(upper_bound_verdict(0.1, 0.4, 0.2), Verdict::Inconclusive);
        assert_eq!(lower_bound_verdict(0.3, 0.5, 0.2), Verdict::Pass);
        assert_eq!(lower_bound_verdict(0.05, 0.1, 0.2), Verdict::Fail);
        assert_eq!(lower_bound_verdict(0.1, 0.4, 0.2), Verdict::Inconclusive);
        assert_eq!(equality_within_ci(0.9, 1.1, 1.0), Verdict::Pass);
        assert_eq!(equality_within_ci(1.05, 1.1, 1.0), Verdict::Fail);
        assert_eq!(equality_within_3se(1.0, 0.1, 1.25), Verdict::Pass);
        assert_eq!(equality_within_3se(1.0, 0.1, 1.35), Verdict::Fail);
    }

    #[test]
    fn exit_codes_follow_worst_verdict() {
        let cfg = small_config(0.75, 1);
        let mk = |v: Verdict| {
            make_report(
                &cfg,
                "test".into(),
                Empirical {
                    estimate: 0.0,
                    ci_low: 0.0,
                    ci_high: 0.0,
                },
                Analytic {
                    clamped: 0.0,
                    unclamped: 0.0,
                },
                v,
                100,
                0,
            )
        };
        assert_eq!(overall_exit_code(&[mk(Verdict::Pass)]), 0);
        assert_eq!(
            overall_exit_code(&[mk(Verdict::Pass), mk(Verdict::Inconclusive)]),
            3
        );
        assert_eq!(
            overall_exit_code(&[mk(Verdict::Inconclusive), mk(Verdict::Fail)]),
            2
        );
        assert_eq!(overall_exit_code(&[]), 0);
    }

    #[test]
    fn kolmogorov_critical_inverts_the_tail() {
        for &alpha in &[0.05, 0.01] {
            for &n in &[100.0, 5000.0] {
                let c = kolmogorov_critical(alpha, n);
                let p = kolmogorov_sf(n.sqrt() * c);
                assert!((p - alpha).abs() < 1e-6, "alpha={alpha} n={n} p={p}");
            }
        }
        // Classical value: critical statistic at alpha=0.05 is ~1.3581/sqrt(n).
        let c = kolmogorov_critical(0.05, 400.0);
        assert!((c - 1.3581 / 20.0).abs() < 1e-4);
    }

    #[test]
    fn signed_cdf_difference_detects_domination() {
        // a dominates b samplewise: signed max difference is exactly zero.
        let a = sorted(&[2.0, 3.0, 5.0]);
        let b = sorted(&[1.0, 2.5, 4.0]);
        assert_eq!(signed_max_cdf_difference(&a, &b), 0.0);
        // Reversed: a's CDF sits above b's somewhere.
        assert!(signed_max_cdf_difference(&b, &a) > 0.0);
        // Identical samples: zero.
        assert_eq!(signed_max_cdf_difference(&a, &a), 0.0);
    }

    #[test]
    fn suites_gate_on_the_hurst_domain() {
        let brownian = small_config(0.5, 2);
        assert!(matches!(
            verify_second_moment(&brownian),
            Err(Error::RequiresPersistence(_))
        ));
        assert!(matches!(
            verify_tail_bounds(&brownian),
            Err(Error::RequiresPersistence(_))
        ));
        assert!(matches!(
            verify_gap_bound(&brownian),
            Err(Error::RequiresPersistence(_))
        ));
        assert!(matches!(
            verify_exponential_sup(&brownian, 1.0),
            Err(Error::RequiresPersistence(_))
        ));
        let persistent = small_config(0.75, 2);
        assert!(matches!(
            bm_sanity_suite(&persistent),
            Err(Error::RequiresBrownian(_))
        ));
        let anti = small_config(0.3, 2);
        assert!(matches!(
            verify_laplace_bound(&anti),
            Err(Error::RequiresPersistence(_))
        ));

        let mut tiny = small_config(0.75, 2);
        tiny.paths = 50;
        assert!(matches!(
            verify_second_moment(&tiny),
            Err(Error::TooFewSamples { needed: 100, .. })
        ));
    }

    #[test]
    fn suite_names_round_trip_and_all_expands_by_domain() {
        for s in [
            Suite::Thm1Identity,
            Suite::Thm1Moment,
            Suite::CorollaryTail,
            Suite::Thm2Tail,
            Suite::Thm2Expsup,
            Suite::Eq15Laplace,
            Suite::Thm3Gap,
            Suite::BmSanity,
            Suite::RiskReport,
        ] {
            assert_eq!(Suite::from_name(s.name()).unwrap(), s);
        }
        let err = Suite::from_name("nosuch").unwrap_err();
        assert!(err.to_string().contains("thm1-identity"));

        let h = |v: f64| Hurst::new(v).unwrap();
        let persistent = Suite::all_for(h(0.75));
        assert!(persistent.contains(&Suite::Thm1Moment));
        assert!(persistent.contains(&Suite::RiskReport));
        assert!(!persistent.contains(&Suite::BmSanity));
        let brownian = Suite::all_for(h(0.5));
        assert!(brownian.contains(&Suite::BmSanity));
        assert!(brownian.contains(&Suite::Eq15Laplace));
        assert!(!brownian.contains(&Suite::Thm1Moment));
        let anti = Suite::all_for(h(0.3));
        assert_eq!(anti, vec![Suite::Thm1Identity]);

        let parsed = parse_suites("thm3-gap, thm3-gap, thm1-moment", h(0.75)).unwrap();
        assert_eq!(parsed, vec![Suite::Thm3Gap, Suite::Thm1Moment]);
        assert!(parse_suites("thm3-gap, nosuch", h(0.75)).is_err());
        assert!(parse_suites(" , ", h(0.75)).is_err());
        let all = parse_suites("all", h(0.5)).unwrap();
        assert!(all.contains(&Suite::BmSanity) && !all.contains(&Suite::Thm3Gap));
    }

    #[test]
    fn second_moment_suite_reports_the_violation_truthfully() {
        // The reflected supremum dominates the terminal value on every
        // path, so its second moment strictly exceeds the claimed bound;
        // the suite must say so rather than pass. Sample size is chosen so
        // the interval clears the bound decisively.
        let mut cfg = small_config(0.75, 11);
        cfg.paths = 2000;
        cfg.steps = 256;
        let reports = verify_second_moment(&cfg).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.claim_id, "thm1-moment");
        assert!(
            r.empirical.estimate > r.analytic.clamped,
            "estimate {} should exceed bound {}",
            r.empirical.estimate,
            r.analytic.clamped
        );
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn deterministic_reports_across_runs_and_entry_points() {
        let cfg = small_config(0.75, 5);
        let a = run_suites(&cfg, &[Suite::Thm3Gap, Suite::CorollaryTail]).unwrap();
        let b = run_suites(&cfg, &[Suite::Thm3Gap, Suite::CorollaryTail]).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.claim_id, y.claim_id);
            assert_eq!(
                x.empirical.estimate.to_bits(),
                y.empirical.estimate.to_bits()
            );
            assert_eq!(x.empirical.ci_low.to_bits(), y.empirical.ci_low.to_bits());
            assert_eq!(x.verdict, y.verdict);
        }
        // Solo entry point reproduces the shared-runner values.
        let solo = verify_gap_bound(&cfg).unwrap();
        let joint: Vec<_> = a
            .iter()
            .filter(|r| r.claim_id.starts_with("thm3-gap"))
            .collect();
        assert_eq!(solo.len(), joint.len());
        for (x, y) in solo.iter().zip(&joint) {
            assert_eq!(
                x.empirical.estimate.to_bits(),
                y.empirical.estimate.to_bits()
            );
        }
    }

    #[test]
    fn paired_checks_hold_deterministically_on_a_small_run() {
        let mut cfg = small_config(0.75, 19);
        cfg.paths = 150;
        let reports = run_suites(&cfg, &[Suite::Thm1Identity]).unwrap();
        let domination = reports
            .iter()
            .find(|r| r.claim_id == "eq13-cdf-domination")
            .unwrap();
        assert_eq!(domination.verdict, Verdict::Pass);
        assert!(domination.empirical.estimate <= 0.0);
        let ordering_reports = verify_tail_bounds(&cfg).unwrap();
        for r in ordering_reports
            .iter()
            .filter(|r| r.claim_id.starts_with("tail-ordering"))
        {
            assert_eq!(r.verdict, Verdict::Pass);
        }
    }
}
