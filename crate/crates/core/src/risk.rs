//! Financial application: geometric price paths driven by the exact
//! generator, drawdown/gap statistics of the volatility-scaled log-price
//! component, and the distribution-function risk bound transferred to the
//! scaled process.
//!
//! The closed-form gap bound applies to the driftless component
//! `sigma * B_t` only; drift shifts log-prices but is excluded from the
//! bounded quantity, which the report states explicitly.

use crate::bounds::{gap_cdf_lower_bound, ClampedBound};
use crate::ensemble::{Extent, SimulationConfig};
use crate::error::{Error, Result};
use crate::grid::SamplePath;
use crate::stats::{ks_two_sample, quantile};
use crate::verify::{
    kolmogorov_critical, lower_bound_verdict, make_report, Analytic, Empirical, SuiteRunner,
    Verdict, VerificationReport, ENSEMBLE_RISK, ENSEMBLE_RISK_BM,
};
use serde::Serialize;

/// Default quantile levels reported for scaled drawdown and gap.
pub const DEFAULT_QUANTILE_LEVELS: [f64; 4] = [0.5, 0.9, 0.95, 0.99];

/// Parameters of the geometric price model
/// `price(t) = initial_price * exp((rate + drift) t + volatility * B_t)`.
#[derive(Debug, Clone, Serialize)]
pub struct RiskModelParams {
    pub initial_price: f64,
    pub rate: f64,
    pub drift: f64,
    pub volatility: f64,
    pub maturity: f64,
    pub hurst: crate::grid::Hurst,
}

impl RiskModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_price.is_finite() && self.initial_price > 0.0) {
            return Err(Error::NonPositive {
                name: "initial price",
                value: self.initial_price,
            });
        }
        if !(self.volatility.is_finite() && self.volatility > 0.0) {
            return Err(Error::NonPositive {
                name: "volatility",
                value: self.volatility,
            });
        }
        if !(self.maturity.is_finite() && self.maturity > 0.0) {
            return Err(Error::NonPositive {
                name: "maturity",
                value: self.maturity,
            });
        }
        if !(self.rate.is_finite() && self.drift.is_finite()) {
            return Err(Error::NonPositive {
                name: "rate/drift",
                value: f64::NAN,
            });
        }
        Ok(())
    }

    /// Stock-like defaults used when a verification run needs a concrete
    /// model: unit initial scale 100, 5% rate, no excess drift, 20%
    /// volatility, maturity equal to the simulation horizon.
    pub fn default_for(config: &SimulationConfig) -> Self {
        Self {
            initial_price: 100.0,
            rate: 0.05,
            drift: 0.0,
            volatility: 0.2,
            maturity: config.horizon,
            hurst: config.hurst,
        }
    }
}

/// Pointwise exponential transform of a driving path into prices. The path
/// must span exactly the model maturity with the model's Hurst parameter.
pub fn fbs_price_path(params: &RiskModelParams, path: &SamplePath) -> Result<Vec<f64>> {
    params.validate()?;
    let horizon = path.grid().horizon();
    if (horizon - params.maturity).abs() > 1e-12 * params.maturity.max(1.0) {
        return Err(Error::ModelMismatch {
            name: "maturity",
            expected: params.maturity,
            got: horizon,
        });
    }
    if path.hurst().value() != params.hurst.value() {
        return Err(Error::ModelMismatch {
            name: "hurst",
            expected: params.hurst.value(),
            got: path.hurst().value(),
        });
    }
    let growth = params.rate + params.drift;
    Ok(path
        .grid()
        .times()
        .zip(path.values())
        .map(|(t, &b)| params.initial_price * (growth * t + params.volatility * b).exp())
        .collect())
}

/// Lower bound on the probability that the scaled driftless log-price
/// component stays within `y` of its running maximum at the given horizon.
/// Requires a persistent Hurst parameter and `horizon <= maturity`.
pub fn scaled_gap_risk_bound(
    params: &RiskModelParams,
    horizon: f64,
    y: f64,
) -> Result<ClampedBound> {
    params.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::NonPositive {
            name: "horizon",
            value: horizon,
        });
    }
    if horizon > params.maturity {
        return Err(Error::ModelMismatch {
            name: "horizon beyond maturity",
            expected: params.maturity,
            got: horizon,
        });
    }
    gap_cdf_lower_bound(horizon, params.hurst, y / params.volatility)
}

/// One row of the report's quantile table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuantileRow {
    pub level: f64,
    pub scaled_drawdown: f64,
    pub scaled_gap: f64,
}

/// Drawdown/gap study of the scaled log-price component: empirical
/// quantiles, the transferred distribution bound (persistent case), the
/// Brownian-point law cross-check, and a descriptive drawdown-vs-supremum
/// CDF distance (no claim attached).
#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub params: RiskModelParams,
    pub config: SimulationConfig,
    pub quantiles: Vec<QuantileRow>,
    pub reports: Vec<VerificationReport>,
    /// KS distance between the laws of the scaled drawdown and the scaled
    /// reflected supremum; descriptive only, no verdict is attached.
    pub drawdown_vs_reflected_sup_distance: f64,
    pub note: String,
}

/// Bound and law-equality reports for the scaled gap: the distribution
/// lower bound per threshold in the persistent case, and at the Brownian
/// point the equality in law between the terminal gap and the reflected
/// terminal value (checked against an independent ensemble).
pub(crate) fn risk_verification_reports(
    runner: &mut SuiteRunner,
) -> Result<Vec<VerificationReport>> {
    let config = runner.config().clone();
    let params = RiskModelParams::default_for(&config);
    let mut out = Vec::new();
    if config.hurst.is_persistent() {
        let ens = runner.ensemble(ENSEMBLE_RISK, Extent::Horizon)?;
        let scaled_gaps: Vec<f64> = ens.gaps().iter().map(|g| params.volatility * g).collect();
        for &y in &config.y_grid {
            let cdf = crate::stats::empirical_cdf(&scaled_gaps, y, config.confidence)?;
            let bound = scaled_gap_risk_bound(&params, config.horizon, y)?;
            out.push(make_report(
                &config,
                format!("risk-gap[y={y}]"),
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
    }
    if config.hurst.is_brownian() {
        let ens = runner.ensemble(ENSEMBLE_RISK, Extent::Horizon)?;
        let reference = runner.ensemble(ENSEMBLE_RISK_BM, Extent::Horizon)?;
        let scaled_gaps: Vec<f64> = ens.gaps().iter().map(|g| params.volatility * g).collect();
        let scaled_abs_terminals: Vec<f64> = reference
            .terminals()
            .iter()
            .map(|t| params.volatility * t.abs())
            .collect();
        let ks = ks_two_sample(&scaled_gaps, &scaled_abs_terminals)?;
        let alpha = config.alpha();
        let verdict = if ks.p_value > alpha {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        out.push(make_report(
            &config,
            "risk-levy-gap-law".to_string(),
            Empirical {
                estimate: ks.statistic,
                ci_low: ks.statistic,
                ci_high: ks.statistic,
            },
            Analytic {
                clamped: kolmogorov_critical(alpha, ks.effective_samples),
                unclamped: ks.p_value,
            },
            verdict,
            ens.len(),
            0,
        ));
    }
    Ok(out)
}

/// Simulates the log-price driver over the model maturity (at the
/// configuration's per-unit resolution) and assembles the drawdown/gap
/// study.
pub fn drawdown_report(params: &RiskModelParams, config: &SimulationConfig) -> Result<RiskReport> {
    params.validate()?;
    config.validate()?;
    if params.hurst.value() != config.hurst.value() {
        return Err(Error::ModelMismatch {
            name: "hurst",
            expected: params.hurst.value(),
            got: config.hurst.value(),
        });
    }
    let mut sim = config.clone();
    if params.maturity != config.horizon {
        sim.steps = ((params.maturity * config.steps_per_unit()).ceil() as usize).max(1);
        sim.horizon = params.maturity;
        sim.censor_horizon = sim.censor_horizon.max(params.maturity);
    }
    let mut runner = SuiteRunner::new(&sim)?;
    let reports = risk_verification_reports(&mut runner)?;
    let ens = runner.ensemble(ENSEMBLE_RISK, Extent::Horizon)?;
    let sigma = params.volatility;
    let scaled_drawdowns: Vec<f64> = ens.drawdowns().iter().map(|d| sigma * d).collect();
    let scaled_gaps: Vec<f64> = ens.gaps().iter().map(|g| sigma * g).collect();
    let scaled_reflected: Vec<f64> = ens.reflected_sups().iter().map(|m| sigma * m).collect();
    let quantiles = DEFAULT_QUANTILE_LEVELS
        .iter()
        .map(|&level| {
            Ok(QuantileRow {
                level,
                scaled_drawdown: quantile(&scaled_drawdowns, level)?,
                scaled_gap: quantile(&scaled_gaps, level)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let distance = ks_two_sample(&scaled_drawdowns, &scaled_reflected)?.statistic;
    let note = if config.hurst.is_brownian() {
        "Quantiles and bounds concern the driftless scaled log-price component. At the \
         Brownian point the terminal gap equals the reflected terminal value in law; the \
         risk-levy-gap-law report checks that equality against an independent ensemble. \
         The drawdown/reflected-supremum distance is descriptive only."
    } else {
        "Quantiles and bounds concern the driftless scaled log-price component; drift \
         shifts prices but not these statistics. No claim is made relating the drawdown \
         law to the reflected-supremum law; their CDF distance is descriptive only."
    };
    Ok(RiskReport {
        params: params.clone(),
        config: sim,
        quantiles,
        reports,
        drawdown_vs_reflected_sup_distance: distance,
        note: note.to_string(),
    })
}
