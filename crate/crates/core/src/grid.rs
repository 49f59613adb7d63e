//! Shared domain types: the Hurst exponent, uniform time grids, sample paths,
//! and the counter-based seeding scheme that makes parallel simulation
//! reproducible.

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;

/// Hurst exponent of fractional Brownian motion, restricted to the open
/// interval (0, 1). `H = 1/2` recovers standard Brownian motion; `H > 1/2`
/// gives persistent paths with positively correlated increments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The exponent `2H` that governs the variance scale `t^{2H}`.
    pub fn two_h(self) -> f64 {
        2.0 * self.0
    }

    pub fn is_brownian(self) -> bool {
        self.0 == 0.5
    }

    /// Increments are positively correlated iff `H > 1/2`.
    pub fn is_persistent(self) -> bool {
        self.0 > 0.5
    }
}

/// Uniform grid `0 = t_0 < t_1 < … < t_n = horizon` with spacing
/// `h = horizon / n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if horizon.is_finite() && horizon > 0.0 && steps >= 1 {
            Ok(Self { horizon, steps })
        } else {
            Err(Error::InvalidGrid { horizon, steps })
        }
    }

    pub fn horizon(self) -> f64 {
        self.horizon
    }

    pub fn steps(self) -> usize {
        self.steps
    }

    pub fn spacing(self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// Grid point `t_k`, computed so that `time(steps) == horizon` exactly.
    pub fn time(self, k: usize) -> f64 {
        self.horizon * (k as f64 / self.steps as f64)
    }

    pub fn times(self) -> impl Iterator<Item = f64> {
        (0..=self.steps).map(move |k| self.time(k))
    }
}

/// A simulated path on a uniform grid, anchored at `values[0] == 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    grid: TimeGrid,
    hurst: Hurst,
    values: Vec<f64>,
}

impl SamplePath {
    /// Wraps raw grid values as a path. The value vector must have
    /// `steps + 1` entries and start at zero.
    pub fn from_values(grid: TimeGrid, hurst: Hurst, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.steps() + 1 {
            return Err(Error::LengthMismatch {
                expected: grid.steps() + 1,
                got: values.len(),
            });
        }
        if values[0] != 0.0 {
            return Err(Error::PathNotAnchored(values[0]));
        }
        Ok(Self {
            grid,
            hurst,
            values,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths are never empty")
    }

    /// Writes the path as CSV with header `t,value`, one row per grid point,
    /// both columns at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.grid.time(k), v)?;
        }
        Ok(())
    }
}

/// Selects one of `2^64` independent ChaCha8 streams for a master seed.
///
/// Replication `k`'s randomness is a pure function of `(master_seed, k)`, so
/// ensembles reproduce bit-for-bit regardless of thread count or scheduling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RngSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl RngSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Maps an (ensemble, replication) pair to a stream id. Distinct ensembles
/// within one run occupy disjoint `2^32`-wide stream ranges.
pub fn ensemble_stream(ensemble: u32, replication: u32) -> u64 {
    ((ensemble as u64) << 32) | replication as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn hurst_rejects_out_of_range() {
        assert!(Hurst::new(0.0).is_err());
        assert!(Hurst::new(1.0).is_err());
        assert!(Hurst::new(-0.2).is_err());
        assert!(Hurst::new(f64::NAN).is_err());
        assert!(Hurst::new(0.5).unwrap().is_brownian());
        assert!(Hurst::new(0.75).unwrap().is_persistent());
        assert_eq!(Hurst::new(0.75).unwrap().two_h(), 1.5);
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let grid = TimeGrid::new(2.0, 7).unwrap();
        assert_eq!(grid.time(0), 0.0);
        assert_eq!(grid.time(7), 2.0);
        assert_eq!(grid.times().count(), 8);
        assert!(TimeGrid::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
    }

    #[test]
    fn path_requires_anchor_and_length() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let h = Hurst::new(0.5).unwrap();
        assert!(SamplePath::from_values(grid, h, vec![0.0, 1.0, 2.0]).is_ok());
        assert!(SamplePath::from_values(grid, h, vec![0.1, 1.0, 2.0]).is_err());
        assert!(SamplePath::from_values(grid, h, vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let h = Hurst::new(0.5).unwrap();
        let path = SamplePath::from_values(grid, h, vec![0.0, 0.5, -1.0]).unwrap();
        let mut buf = Vec::new();
        path.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,value");
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        assert!(lines[3].ends_with("-1.0000000000000000e0"));
    }

    #[test]
    fn distinct_streams_are_distinct_and_reproducible() {
        let a1: f64 = RngSpec::new(42, 0).rng().random();
        let a2: f64 = RngSpec::new(42, 0).rng().random();
        let b: f64 = RngSpec::new(42, 1).rng().random();
        assert_eq!(a1, a2);
        assert_ne!(a1, b);
        assert_ne!(ensemble_stream(1, 0), ensemble_stream(0, 1));
        assert_eq!(ensemble_stream(2, 3), (2u64 << 32) | 3);
    }
}
