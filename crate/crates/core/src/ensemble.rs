//! Ensemble simulation: drives the exact generator over many independent
//! replications and collects per-path extreme-value functionals.
//!
//! Determinism contract: replication `i` of ensemble `e` draws from the
//! counter-based stream `ensemble_stream(e, i)` of the master seed, and
//! results are collected in replication order, so an ensemble is
//! bit-identical for a given configuration regardless of how many worker
//! threads execute it.

use crate::error::{Error, Result};
use crate::functionals::{
    first_hitting_time, max_drawdown, reflected_supremum, supremum, terminal_gap, FunctionalRecord,
};
use crate::generate::{path_from_increments, CirculantSampler};
use crate::grid::{ensemble_stream, Hurst, RngSpec, SamplePath, TimeGrid};
use rayon::prelude::*;
use serde::Serialize;

/// Default number of Monte Carlo replications.
pub const DEFAULT_PATHS: usize = 10_000;
/// Default grid resolution per unit of time.
pub const DEFAULT_STEPS_PER_UNIT: usize = 1 << 14;
/// Default confidence level for every reported interval.
pub const DEFAULT_CONFIDENCE: f64 = 0.99;
/// Default thresholds for tail-probability checks.
pub const DEFAULT_X_GRID: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
/// Default thresholds for gap-distribution checks.
pub const DEFAULT_Y_GRID: [f64; 3] = [1.0, 2.0, 4.0];
/// Default rates for Laplace-transform and exponential-horizon checks.
pub const DEFAULT_LAMBDA_GRID: [f64; 3] = [0.5, 1.0, 2.0];
/// Default ratio of censoring horizon to supremum horizon.
pub const DEFAULT_CENSOR_FACTOR: f64 = 4.0;

/// Full description of a Monte Carlo run: process, grid, sample size,
/// seeding, and the parameter grids the verification suites sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationConfig {
    pub hurst: Hurst,
    /// Supremum window length (the `a` in the bounds).
    pub horizon: f64,
    /// Grid steps across `horizon`.
    pub steps: usize,
    /// Number of replications.
    pub paths: usize,
    pub master_seed: u64,
    /// Confidence level in (0,1) for all intervals; the law-equality test
    /// runs at significance `1 - confidence`.
    pub confidence: f64,
    /// Horizon to which hitting-time runs are extended before censoring.
    pub censor_horizon: f64,
    pub x_grid: Vec<f64>,
    pub y_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
}

impl SimulationConfig {
    /// Configuration with the documented defaults: unit horizon, 2^14 steps,
    /// 10^4 paths, 99% confidence, censoring at four horizons.
    pub fn new(hurst: Hurst, master_seed: u64) -> Self {
        Self {
            hurst,
            horizon: 1.0,
            steps: DEFAULT_STEPS_PER_UNIT,
            paths: DEFAULT_PATHS,
            master_seed,
            confidence: DEFAULT_CONFIDENCE,
            censor_horizon: DEFAULT_CENSOR_FACTOR,
            x_grid: DEFAULT_X_GRID.to_vec(),
            y_grid: DEFAULT_Y_GRID.to_vec(),
            lambda_grid: DEFAULT_LAMBDA_GRID.to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::NonPositive {
                name: "horizon",
                value: self.horizon,
            });
        }
        if self.steps == 0 {
            return Err(Error::InvalidGrid {
                horizon: self.horizon,
                steps: self.steps,
            });
        }
        if self.paths == 0 {
            return Err(Error::TooFewSamples { needed: 1, got: 0 });
        }
        if !(self.confidence.is_finite() && self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::NotAProbability {
                name: "confidence",
                value: self.confidence,
            });
        }
        if !self.censor_horizon.is_finite() || self.censor_horizon < self.horizon {
            return Err(Error::CensorBelowHorizon {
                censor: self.censor_horizon,
                horizon: self.horizon,
            });
        }
        for (name, grid) in [
            ("x_grid", &self.x_grid),
            ("y_grid", &self.y_grid),
            ("lambda_grid", &self.lambda_grid),
        ] {
            if grid.is_empty() {
                return Err(Error::NonPositive { name, value: 0.0 });
            }
            for &v in grid {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::NonPositive { name, value: v });
                }
            }
        }
        Ok(())
    }

    /// Grid covering the supremum window `[0, horizon]`.
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.steps)
    }

    /// Grid extended to at least `censor_horizon` at the same spacing.
    pub fn censor_grid(&self) -> Result<TimeGrid> {
        let steps = self.censor_steps();
        TimeGrid::new(self.horizon * steps as f64 / self.steps as f64, steps)
    }

    /// Steps in the censor-extended grid (same per-unit resolution).
    pub fn censor_steps(&self) -> usize {
        (self.censor_horizon / self.horizon * self.steps as f64).ceil() as usize
    }

    /// Grid resolution per unit of time.
    pub fn steps_per_unit(&self) -> f64 {
        self.steps as f64 / self.horizon
    }

    /// Significance level of the law-equality test.
    pub fn alpha(&self) -> f64 {
        1.0 - self.confidence
    }
}

/// How far each replication is simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extent {
    /// Simulate the supremum window only; hitting times censor at `horizon`.
    Horizon,
    /// Extend to the censoring horizon; window functionals still cover
    /// `[0, horizon]`, hitting times censor at the extended end.
    CensorHorizon,
}

/// Per-path functionals for one simulated ensemble.
#[derive(Debug, Clone)]
pub struct Ensemble {
    hurst: Hurst,
    /// Supremum-window length (the `a` in the bounds).
    horizon: f64,
    /// Time at which unhit replications were censored.
    censor_time: f64,
    records: Vec<FunctionalRecord>,
}

impl Ensemble {
    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn censor_time(&self) -> f64 {
        self.censor_time
    }

    pub fn records(&self) -> &[FunctionalRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn map(&self, f: impl Fn(&FunctionalRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }

    /// One-sided suprema `S` over the window, per replication.
    pub fn sups(&self) -> Vec<f64> {
        self.map(|r| r.sup)
    }

    /// Reflected suprema `M = sup |B|` over the window, per replication.
    pub fn reflected_sups(&self) -> Vec<f64> {
        self.map(|r| r.reflected_sup)
    }

    pub fn sups_squared(&self) -> Vec<f64> {
        self.map(|r| r.sup * r.sup)
    }

    pub fn reflected_sups_squared(&self) -> Vec<f64> {
        self.map(|r| r.reflected_sup * r.reflected_sup)
    }

    pub fn terminals(&self) -> Vec<f64> {
        self.map(|r| r.terminal)
    }

    /// Terminal gaps `Y = S - B(horizon)`, per replication.
    pub fn gaps(&self) -> Vec<f64> {
        self.map(|r| r.gap)
    }

    pub fn drawdowns(&self) -> Vec<f64> {
        self.map(|r| r.drawdown)
    }

    /// Number of replications whose level-1 hitting time was censored.
    pub fn censored_count(&self, reflected: bool) -> usize {
        self.records
            .iter()
            .filter(|r| {
                if reflected {
                    r.tau1.is_censored()
                } else {
                    r.h1.is_censored()
                }
            })
            .count()
    }

    /// Transforms the level-1 hitting times into `(horizon / t)^{2H}`, the
    /// quantity whose law matches the squared (reflected) supremum.
    /// A censored entry maps to negative infinity: its transform is known
    /// to lie below `(horizon / censor_time)^{2H}`, the smallest threshold
    /// at which the comparison is estimable.
    pub fn hitting_transform(&self, reflected: bool) -> Vec<f64> {
        let two_h = self.hurst.two_h();
        self.records
            .iter()
            .map(|r| {
                let outcome = if reflected { &r.tau1 } else { &r.h1 };
                if outcome.is_censored() {
                    f64::NEG_INFINITY
                } else {
                    (self.horizon / outcome.time()).powf(two_h)
                }
            })
            .collect()
    }

    /// Smallest threshold at which the law comparison against hitting times
    /// is estimable: `(horizon / censor_time)^{2H}`.
    pub fn estimable_lower_bound(&self) -> f64 {
        (self.horizon / self.censor_time).powf(self.hurst.two_h())
    }

    /// Conservative per-replication samples of `exp(-lambda * t^{2H})` for
    /// the one-sided hitting time: a censored replication contributes the
    /// value at the censoring time, an upper bound on its true contribution.
    pub fn laplace_samples(&self, lambda: f64) -> Result<Vec<f64>> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::NonPositive {
                name: "lambda",
                value: lambda,
            });
        }
        let two_h = self.hurst.two_h();
        Ok(self.map(|r| (-lambda * r.h1.time().powf(two_h)).exp()))
    }
}

fn window_record(
    full: &SamplePath,
    window_grid: TimeGrid,
    window_steps: usize,
) -> Result<FunctionalRecord> {
    let prefix = SamplePath::from_values(
        window_grid,
        full.hurst(),
        full.values()[..=window_steps].to_vec(),
    )?;
    Ok(FunctionalRecord {
        sup: supremum(&prefix),
        reflected_sup: reflected_supremum(&prefix),
        terminal: prefix.terminal(),
        gap: terminal_gap(&prefix),
        drawdown: max_drawdown(&prefix),
        tau1: first_hitting_time(full, 1.0, true)?,
        h1: first_hitting_time(full, 1.0, false)?,
    })
}

/// Simulates `config.paths` independent replications with the circulant
/// generator and returns their functional records in replication order.
///
/// `ensemble_id` selects the family of random streams: distinct ids give
/// statistically independent ensembles under the same master seed.
pub fn simulate_ensemble(
    config: &SimulationConfig,
    ensemble_id: u32,
    extent: Extent,
) -> Result<Ensemble> {
    config.validate()?;
    let window_grid = config.grid()?;
    let sim_grid = match extent {
        Extent::Horizon => window_grid,
        Extent::CensorHorizon => config.censor_grid()?,
    };
    let sampler = CirculantSampler::new(sim_grid, config.hurst)?;
    let records = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let spec = RngSpec::new(config.master_seed, ensemble_stream(ensemble_id, i as u32));
            let mut rng = spec.rng();
            let increments = sampler.sample_increments(&mut rng);
            let path = path_from_increments(sim_grid, config.hurst, &increments)?;
            match extent {
                Extent::Horizon => Ok(FunctionalRecord::from_path(&path)),
                Extent::CensorHorizon => window_record(&path, window_grid, config.steps),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        hurst: config.hurst,
        horizon: config.horizon,
        censor_time: sim_grid.horizon(),
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_config(hurst: f64, seed: u64) -> SimulationConfig {
        let mut cfg = SimulationConfig::new(Hurst::new(hurst).unwrap(), seed);
        cfg.steps = 128;
        cfg.paths = 200;
        cfg
    }

    #[test]
    fn defaults_match_documented_values() {
        let cfg = SimulationConfig::new(Hurst::new(0.75).unwrap(), 7);
        assert_eq!(cfg.paths, 10_000);
        assert_eq!(cfg.steps, 16_384);
        assert_eq!(cfg.horizon, 1.0);
        assert_eq!(cfg.confidence, 0.99);
        assert_eq!(cfg.censor_horizon, 4.0);
        assert_eq!(cfg.x_grid, vec![1.0, 1.5, 2.0, 3.0]);
        assert_eq!(cfg.y_grid, vec![1.0, 2.0, 4.0]);
        assert_eq!(cfg.lambda_grid, vec![0.5, 1.0, 2.0]);
        assert!(cfg.validate().is_ok());
        assert_relative_eq!(cfg.alpha(), 0.01, max_relative = 1e-12);
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let mut cfg = small_config(0.75, 1);
        cfg.censor_horizon = 0.5;
        assert!(matches!(
            cfg.validate(),
            Err(Error::CensorBelowHorizon { .. })
        ));

        let mut cfg = small_config(0.75, 1);
        cfg.paths = 0;
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(0.75, 1);
        cfg.confidence = 1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(0.75, 1);
        cfg.x_grid = vec![1.0, -2.0];
        assert!(cfg.validate().is_err());

        let mut cfg = small_config(0.75, 1);
        cfg.lambda_grid.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn censor_grid_preserves_spacing() {
        let mut cfg = small_config(0.75, 1);
        cfg.horizon = 1.0;
        cfg.steps = 128;
        cfg.censor_horizon = 4.0;
        assert_eq!(cfg.censor_steps(), 512);
        let g = cfg.censor_grid().unwrap();
        assert_eq!(g.steps(), 512);
        assert_relative_eq!(
            g.spacing(),
            cfg.grid().unwrap().spacing(),
            max_relative = 1e-15
        );
        // Non-integer ratio rounds the horizon up, never down.
        cfg.censor_horizon = 1.7;
        let g = cfg.censor_grid().unwrap();
        assert!(g.horizon() >= 1.7 - 1e-12);
        assert_relative_eq!(g.spacing(), 1.0 / 128.0, max_relative = 1e-12);
    }

    #[test]
    fn ensembles_are_deterministic_and_stream_separated() {
        let cfg = small_config(0.6, 42);
        let a = simulate_ensemble(&cfg, 3, Extent::Horizon).unwrap();
        let b = simulate_ensemble(&cfg, 3, Extent::Horizon).unwrap();
        assert_eq!(a.records().len(), 200);
        for (ra, rb) in a.records().iter().zip(b.records()) {
            assert_eq!(ra.sup, rb.sup);
            assert_eq!(ra.drawdown, rb.drawdown);
            assert_eq!(ra.tau1.time(), rb.tau1.time());
        }
        let c = simulate_ensemble(&cfg, 4, Extent::Horizon).unwrap();
        assert!(a
            .records()
            .iter()
            .zip(c.records())
            .any(|(x, y)| x.sup != y.sup));
    }

    #[test]
    fn terminal_moments_match_exact_law() {
        // The generator is exact, so terminal mean/variance follow the
        // covariance law at any resolution.
        let mut cfg = small_config(0.5, 9);
        cfg.paths = 4000;
        let e = simulate_ensemble(&cfg, 1, Extent::Horizon).unwrap();
        let terminals = e.terminals();
        let mean = crate::stats::mean(&terminals);
        let se = (1.0 / terminals.len() as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean {mean} exceeds 3 SE {se}");

        let mut cfg = small_config(0.75, 9);
        cfg.paths = 4000;
        let e = simulate_ensemble(&cfg, 1, Extent::Horizon).unwrap();
        let sq: Vec<f64> = e.terminals().iter().map(|&v| v * v).collect();
        let var = crate::stats::mean(&sq);
        let se = (2.0f64 / sq.len() as f64).sqrt();
        assert!(
            (var - 1.0).abs() <= 3.0 * se,
            "variance {var} outside 3 SE {se}"
        );
    }

    #[test]
    fn censor_extension_changes_censor_time_only() {
        let cfg = small_config(0.75, 11);
        let short = simulate_ensemble(&cfg, 5, Extent::Horizon).unwrap();
        let long = simulate_ensemble(&cfg, 5, Extent::CensorHorizon).unwrap();
        assert_relative_eq!(short.censor_time(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(long.censor_time(), 4.0, max_relative = 1e-14);
        assert!(long.censored_count(false) <= short.censored_count(false));
        // Window functionals agree in law parameters; hitting within the
        // window implies the same detection in both extents.
        for r in long.records() {
            if r.sup >= 1.0 {
                assert!(!r.h1.is_censored());
                assert!(r.h1.time() <= 1.0 + 1e-12);
            }
            assert!(r.reflected_sup >= r.sup.abs().max(r.terminal.abs()) - 1e-12);
        }
    }

    #[test]
    fn hitting_transform_marks_censored_entries() {
        let cfg = small_config(0.75, 13);
        let e = simulate_ensemble(&cfg, 6, Extent::CensorHorizon).unwrap();
        let transformed = e.hitting_transform(true);
        let lower = e.estimable_lower_bound();
        assert_relative_eq!(lower, 0.25f64.powf(1.5), max_relative = 1e-12);
        let censored = e.censored_count(true);
        let neg_inf = transformed
            .iter()
            .filter(|v| **v == f64::NEG_INFINITY)
            .count();
        assert_eq!(censored, neg_inf);
        for (&t, r) in transformed.iter().zip(e.records()) {
            if !r.tau1.is_censored() {
                assert!(t >= lower - 1e-12);
            }
        }
    }

    #[test]
    fn laplace_samples_are_conservative_in_censor_time() {
        let cfg = small_config(0.75, 17);
        let e = simulate_ensemble(&cfg, 6, Extent::CensorHorizon).unwrap();
        let samples = e.laplace_samples(1.0).unwrap();
        let censored_value = (-(4.0f64.powf(1.5))).exp();
        for (s, r) in samples.iter().zip(e.records()) {
            assert!(*s > 0.0 && *s <= 1.0);
            if r.h1.is_censored() {
                assert_relative_eq!(*s, censored_value, max_relative = 1e-10);
            }
        }
        assert!(e.laplace_samples(0.0).is_err());
    }
}
