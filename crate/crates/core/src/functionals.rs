//! Extreme-value functionals of a sample path: running and terminal suprema,
//! the reflected (absolute-value) supremum, level hitting times with explicit
//! censoring, the supremum-to-terminal gap, and maximum drawdown.

use crate::error::{Error, Result};
use crate::grid::SamplePath;
use serde::Serialize;
use std::io::Write;

/// Supremum of the path values over the whole grid (includes the anchor at
/// zero, so the result is never negative).
pub fn supremum(path: &SamplePath) -> f64 {
    path.values()
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Supremum of the reflected path `|B|`; always at least [`supremum`].
pub fn reflected_supremum(path: &SamplePath) -> f64 {
    path.values()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Running supremum `sup_{j <= k} B_{t_j}` at every grid point. The last
/// entry equals [`supremum`].
pub fn running_supremum(path: &SamplePath) -> Vec<f64> {
    let mut acc = f64::NEG_INFINITY;
    path.values()
        .iter()
        .map(|&v| {
            acc = acc.max(v);
            acc
        })
        .collect()
}

/// Gap between the supremum and the terminal value, `S - B_horizon`;
/// non-negative by construction.
pub fn terminal_gap(path: &SamplePath) -> f64 {
    supremum(path) - path.terminal()
}

/// Maximum drawdown: the largest drop from a running peak to a later value,
/// computed in one forward pass. Zero for monotone non-decreasing paths, and
/// never smaller than [`terminal_gap`].
pub fn max_drawdown(path: &SamplePath) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut drawdown = 0.0_f64;
    for &v in path.values() {
        peak = peak.max(v);
        drawdown = drawdown.max(peak - v);
    }
    drawdown
}

/// Outcome of a level-crossing search: either the (interpolated) first
/// crossing time, or censoring at the path horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum HittingOutcome {
    Hit(f64),
    Censored(f64),
}

impl HittingOutcome {
    pub fn is_censored(&self) -> bool {
        matches!(self, HittingOutcome::Censored(_))
    }

    /// The hit time, or the censoring horizon for censored outcomes.
    pub fn time(&self) -> f64 {
        match *self {
            HittingOutcome::Hit(t) | HittingOutcome::Censored(t) => t,
        }
    }
}

/// First time the path (or its reflection `|B|` when `reflected` is set)
/// reaches `level > 0`, refined by linear interpolation on the grid segment
/// where the crossing happens. Paths that never reach the level are censored
/// at the horizon.
pub fn first_hitting_time(
    path: &SamplePath,
    level: f64,
    reflected: bool,
) -> Result<HittingOutcome> {
    if !(level.is_finite() && level > 0.0) {
        return Err(Error::NonPositive {
            name: "level",
            value: level,
        });
    }
    Ok(hit_scan(path, level, reflected))
}

fn hit_scan(path: &SamplePath, level: f64, reflected: bool) -> HittingOutcome {
    let values = path.values();
    let grid = path.grid();
    let spacing = grid.spacing();
    // values[0] == 0 < level, so the first crossing (if any) is at k >= 1 and
    // the previous value is strictly inside (-level, level).
    for k in 1..values.len() {
        let prev = values[k - 1];
        let cur = values[k];
        let target = if cur >= level {
            level
        } else if reflected && cur <= -level {
            -level
        } else {
            continue;
        };
        let fraction = (target - prev) / (cur - prev);
        return HittingOutcome::Hit(grid.time(k - 1) + fraction * spacing);
    }
    HittingOutcome::Censored(grid.horizon())
}

/// All extreme-value functionals of one path, with the hitting times of level
/// 1 by the path (`h1`) and by its reflection (`tau1`), censored at the
/// horizon when the level is never reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctionalRecord {
    pub sup: f64,
    pub reflected_sup: f64,
    pub terminal: f64,
    pub gap: f64,
    pub drawdown: f64,
    pub tau1: HittingOutcome,
    pub h1: HittingOutcome,
}

impl FunctionalRecord {
    pub fn from_path(path: &SamplePath) -> Self {
        let sup = supremum(path);
        Self {
            sup,
            reflected_sup: reflected_supremum(path),
            terminal: path.terminal(),
            gap: sup - path.terminal(),
            drawdown: max_drawdown(path),
            tau1: hit_scan(path, 1.0, true),
            h1: hit_scan(path, 1.0, false),
        }
    }
}

/// Writes records as CSV with header
/// `sup,reflected_sup,terminal,gap,drawdown,tau1,tau1_censored,h1,h1_censored`.
/// Censored hitting times report the horizon with flag 1, hits their time
/// with flag 0.
pub fn write_records_csv<W: Write>(records: &[FunctionalRecord], mut out: W) -> Result<()> {
    writeln!(
        out,
        "sup,reflected_sup,terminal,gap,drawdown,tau1,tau1_censored,h1,h1_censored"
    )?;
    for r in records {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.16e},{}",
            r.sup,
            r.reflected_sup,
            r.terminal,
            r.gap,
            r.drawdown,
            r.tau1.time(),
            r.tau1.is_censored() as u8,
            r.h1.time(),
            r.h1.is_censored() as u8,
        )?;
    }
    Ok(())
}
