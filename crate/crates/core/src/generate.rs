//! Exact simulation of fractional Brownian motion on uniform grids.
//!
//! Both generators sample fractional Gaussian noise — the stationary
//! increment process — with its exact finite-dimensional law and then
//! cumulatively sum it into a path:
//!
//! * [`CholeskySampler`] densely factorises the increment covariance matrix.
//!   Setup is O(n^3) and each draw O(n^2), so it is capped at short grids and
//!   mainly serves as an independent cross-check.
//! * [`CirculantSampler`] embeds the covariance in a circulant matrix,
//!   diagonalises it with one FFT, and draws paths in O(n log n). This is the
//!   production sampler for long grids.

use crate::error::{Error, Result};
use crate::grid::{Hurst, RngSpec, SamplePath, TimeGrid};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Largest grid accepted by the dense Cholesky sampler.
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Relative tolerance for clamping tiny negative circulant eigenvalues that
/// arise from floating-point rounding. Anything below `-tol * max_eigenvalue`
/// is treated as a genuine embedding failure.
pub const EIGENVALUE_CLAMP_REL_TOL: f64 = 1e-12;

/// Covariance `E[B_s B_t] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2` of fractional
/// Brownian motion. Requires `s, t >= 0`.
pub fn covariance(s: f64, t: f64, hurst: Hurst) -> Result<f64> {
    if s < 0.0 || s.is_nan() {
        return Err(Error::NegativeTime(s));
    }
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    let two_h = hurst.two_h();
    Ok(0.5 * (s.powf(two_h) + t.powf(two_h) - (t - s).abs().powf(two_h)))
}

/// Autocovariance of fractional Gaussian noise at integer lag `lag` for grid
/// spacing `spacing`:
/// `rho(0) = h^{2H}` and for `lag >= 1`
/// `rho(lag) = h^{2H} ((lag+1)^{2H} + (lag-1)^{2H} - 2 lag^{2H}) / 2`.
///
/// The lag-1 value is positive for `H > 1/2`, zero at `H = 1/2`, and negative
/// for `H < 1/2`; the sequence decays to zero as the lag grows.
pub fn increment_autocovariance(lag: usize, spacing: f64, hurst: Hurst) -> Result<f64> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::NonPositive {
            name: "spacing",
            value: spacing,
        });
    }
    let two_h = hurst.two_h();
    let scale = spacing.powf(two_h);
    if lag == 0 {
        return Ok(scale);
    }
    let n = lag as f64;
    if lag < 64 {
        return Ok(0.5
            * scale
            * ((n + 1.0).powf(two_h) + (n - 1.0).powf(two_h) - 2.0 * n.powf(two_h)));
    }
    // For large lags the direct second difference cancels catastrophically
    // (three terms of size n^{2H} whose difference is ~n^{2H-2}), so switch
    // to the binomial series in 1/n, accurate to ~1e-12 relative here.
    let a = two_h;
    let x2 = 1.0 / (n * n);
    let c2 = a * (a - 1.0) / 2.0;
    let c4 = c2 * (a - 2.0) * (a - 3.0) / 12.0;
    let c6 = c4 * (a - 4.0) * (a - 5.0) / 30.0;
    Ok(scale * n.powf(a) * (x2 * (c2 + x2 * (c4 + x2 * c6))))
}

/// Dense exact sampler: Cholesky factor of the n-by-n increment covariance
/// matrix, reusable across replications.
pub struct CholeskySampler {
    grid: TimeGrid,
    hurst: Hurst,
    /// Packed lower-triangular factor; row `i` holds `i + 1` entries.
    lower: Vec<Vec<f64>>,
}

impl CholeskySampler {
    pub fn new(grid: TimeGrid, hurst: Hurst) -> Result<Self> {
        let n = grid.steps();
        if n > CHOLESKY_MAX_STEPS {
            return Err(Error::GridTooLarge {
                steps: n,
                cap: CHOLESKY_MAX_STEPS,
            });
        }
        let mut row_cov = Vec::with_capacity(n);
        for lag in 0..n {
            row_cov.push(increment_autocovariance(lag, grid.spacing(), hurst)?);
        }
        let lower = cholesky_lower_toeplitz(&row_cov)?;
        Ok(Self { grid, hurst, lower })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    /// Draws one exact fractional-Gaussian-noise vector of length `steps`.
    pub fn sample_increments(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.grid.steps();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; n];
        for (i, row) in self.lower.iter().enumerate() {
            let mut acc = 0.0;
            for (k, l) in row.iter().enumerate() {
                acc += l * z[k];
            }
            out[i] = acc;
        }
        out
    }
}

/// Cholesky factorisation of the symmetric Toeplitz matrix whose first column
/// is `row_cov`. Fails with the offending pivot if the matrix is numerically
/// non-positive-definite.
fn cholesky_lower_toeplitz(row_cov: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = row_cov.len();
    let mut lower: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![0.0; i + 1];
        for j in 0..=i {
            let sum = {
                // Row j is the current one when j == i (not yet pushed).
                let prior: &[f64] = if j == i { &row } else { &lower[j] };
                let mut s = row_cov[i - j];
                for k in 0..j {
                    s -= row[k] * prior[k];
                }
                s
            };
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: sum,
                    });
                }
                row[j] = sum.sqrt();
            } else {
                row[j] = sum / lower[j][j];
            }
        }
        lower.push(row);
    }
    Ok(lower)
}

/// FFT-based exact sampler: the increment covariance is embedded in a
/// circulant matrix of size `m`, the smallest power of two at least
/// `2 * steps`, whose eigenvalues are the FFT of its first row.
///
/// Eigenvalues in `[-tol, 0)` (floating-point noise) are clamped to zero;
/// anything below `-tol` aborts with an embedding error. One draw costs a
/// single length-`m` FFT over `m` standard normal variates.
pub struct CirculantSampler {
    grid: TimeGrid,
    hurst: Hurst,
    m: usize,
    /// Per-frequency scale: `sqrt(lambda_j / m)` at the two real indices
    /// `j = 0, m/2` and `sqrt(lambda_j / (2m))` elsewhere.
    weights: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl CirculantSampler {
    pub fn new(grid: TimeGrid, hurst: Hurst) -> Result<Self> {
        let n = grid.steps();
        let m = (2 * n).next_power_of_two();
        let half = m / 2;
        let mut row = Vec::with_capacity(m);
        for j in 0..m {
            let lag = j.min(m - j);
            row.push(increment_autocovariance(lag, grid.spacing(), hurst)?);
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let eigenvalues = circulant_eigenvalues(&row, fft.as_ref());
        let clamped = clamp_eigenvalues(&eigenvalues)?;
        let weights = clamped
            .iter()
            .enumerate()
            .map(|(j, &lambda)| {
                let divisor = if j == 0 || j == half {
                    m as f64
                } else {
                    2.0 * m as f64
                };
                (lambda / divisor).sqrt()
            })
            .collect();
        Ok(Self {
            grid,
            hurst,
            m,
            weights,
            fft,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    /// Size of the circulant embedding actually used.
    pub fn embedding_size(&self) -> usize {
        self.m
    }

    /// Draws one exact fractional-Gaussian-noise vector of length `steps`.
    ///
    /// The spectral coefficients are filled in a fixed order (index 0, index
    /// m/2, then conjugate pairs ascending), so output is a pure function of
    /// the generator state.
    pub fn sample_increments(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let m = self.m;
        let half = m / 2;
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        buf[0] = Complex::new(self.weights[0] * rng.sample::<f64, _>(StandardNormal), 0.0);
        buf[half] = Complex::new(
            self.weights[half] * rng.sample::<f64, _>(StandardNormal),
            0.0,
        );
        for j in 1..half {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let w = self.weights[j];
            buf[j] = Complex::new(w * re, w * im);
            buf[m - j] = buf[j].conj();
        }
        self.fft.process(&mut buf);
        buf.truncate(self.grid.steps());
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// Real eigenvalues of the circulant matrix with first row `row`: the real
/// parts of the row's forward FFT (the imaginary parts vanish by symmetry).
fn circulant_eigenvalues(row: &[f64], fft: &dyn Fft<f64>) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = row.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Clamps rounding-level negative eigenvalues to zero and rejects anything
/// materially negative.
fn clamp_eigenvalues(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    let max = eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    let tol = EIGENVALUE_CLAMP_REL_TOL * max.max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(eigenvalues.len());
    for (index, &value) in eigenvalues.iter().enumerate() {
        if value < -tol {
            return Err(Error::EmbeddingNotNonnegativeDefinite {
                index,
                value,
                tolerance: tol,
            });
        }
        out.push(value.max(0.0));
    }
    Ok(out)
}

/// One-shot dense-factorisation draw; see [`CholeskySampler`] for reuse.
pub fn fgn_cholesky(grid: TimeGrid, hurst: Hurst, spec: &RngSpec) -> Result<Vec<f64>> {
    let sampler = CholeskySampler::new(grid, hurst)?;
    Ok(sampler.sample_increments(&mut spec.rng()))
}

/// One-shot circulant-embedding draw; see [`CirculantSampler`] for reuse.
pub fn fgn_circulant(grid: TimeGrid, hurst: Hurst, spec: &RngSpec) -> Result<Vec<f64>> {
    let sampler = CirculantSampler::new(grid, hurst)?;
    Ok(sampler.sample_increments(&mut spec.rng()))
}

/// Cumulatively sums an increment vector into a path anchored at zero.
pub fn path_from_increments(
    grid: TimeGrid,
    hurst: Hurst,
    increments: &[f64],
) -> Result<SamplePath> {
    if increments.len() != grid.steps() {
        return Err(Error::LengthMismatch {
            expected: grid.steps(),
            got: increments.len(),
        });
    }
    let mut values = Vec::with_capacity(increments.len() + 1);
    values.push(0.0);
    let mut acc = 0.0;
    for &dx in increments {
        acc += dx;
        values.push(acc);
    }
    SamplePath::from_values(grid, hurst, values)
}

/// Maps a path on `[0, a]` to one on `[0, c*a]` by the self-similarity
/// `B(ct) =(law) c^H B(t)`: the grid stretches by `c` and every value scales
/// by `c^H`. Step count and Hurst exponent are unchanged.
pub fn rescale_path(path: &SamplePath, c: f64) -> Result<SamplePath> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::NonPositive {
            name: "scale factor",
            value: c,
        });
    }
    let hurst = path.hurst();
    let grid = TimeGrid::new(path.grid().horizon() * c, path.grid().steps())?;
    let factor = c.powf(hurst.value());
    let values = path.values().iter().map(|&v| factor * v).collect();
    SamplePath::from_values(grid, hurst, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn h(v: f64) -> Hurst {
        Hurst::new(v).unwrap()
    }

    #[test]
    fn covariance_known_values() {
        // H = 3/4: E[B_1 B_2] = (1 + 2^{3/2} - 1)/2 = sqrt(2).
        assert_relative_eq!(
            covariance(1.0, 2.0, h(0.75)).unwrap(),
            std::f64::consts::SQRT_2,
            max_relative = 1e-15
        );
        // Brownian case reduces to min(s, t).
        assert_relative_eq!(
            covariance(3.0, 5.0, h(0.5)).unwrap(),
            3.0,
            max_relative = 1e-15
        );
        // Variance on the diagonal is t^{2H}.
        assert_relative_eq!(
            covariance(2.0, 2.0, h(0.8)).unwrap(),
            2f64.powf(1.6),
            max_relative = 1e-15
        );
        assert_eq!(covariance(0.0, 7.0, h(0.3)).unwrap(), 0.0);
        assert!(covariance(-1.0, 1.0, h(0.5)).is_err());
        assert!(covariance(1.0, -2.0, h(0.5)).is_err());
    }

    #[test]
    fn covariance_is_symmetric() {
        for &hv in &[0.2, 0.5, 0.65, 0.9] {
            for &(s, t) in &[(0.3, 1.7), (2.0, 0.1), (4.0, 4.0)] {
                let a = covariance(s, t, h(hv)).unwrap();
                let b = covariance(t, s, h(hv)).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn autocovariance_known_values_and_sign() {
        assert_relative_eq!(
            increment_autocovariance(1, 1.0, h(0.75)).unwrap(),
            0.5 * (2f64.powf(1.5) - 2.0),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            increment_autocovariance(1, 1.0, h(0.3)).unwrap(),
            0.5 * (2f64.powf(0.6) - 2.0),
            max_relative = 1e-15
        );
        // Lag zero returns the increment variance h^{2H}.
        assert_relative_eq!(
            increment_autocovariance(0, 0.25, h(0.6)).unwrap(),
            0.25f64.powf(1.2),
            max_relative = 1e-15
        );
        // Uncorrelated at H = 1/2 at any lag (series branch included).
        assert_eq!(increment_autocovariance(3, 1.0, h(0.5)).unwrap(), 0.0);
        assert_eq!(increment_autocovariance(1000, 1.0, h(0.5)).unwrap(), 0.0);
        assert!(increment_autocovariance(1, 1.0, h(0.75)).unwrap() > 0.0);
        assert!(increment_autocovariance(1, 1.0, h(0.3)).unwrap() < 0.0);
        // Long-lag decay follows the power law H(2H-1) k^{2H-2}; the direct
        // second difference would return cancellation noise here.
        let long = increment_autocovariance(1_000_000, 1.0, h(0.75)).unwrap();
        assert_relative_eq!(long, 0.75 * 0.5 * 1e-3, max_relative = 1e-6);
        // Smooth across the series switch at lag 64.
        let below = increment_autocovariance(63, 1.0, h(0.8)).unwrap();
        let at = increment_autocovariance(64, 1.0, h(0.8)).unwrap();
        let ratio = (63.0f64 / 64.0).powf(1.6 - 2.0);
        assert_relative_eq!(below / at, ratio, max_relative = 1e-4);
        assert!(increment_autocovariance(1, 0.0, h(0.5)).is_err());
    }

    #[test]
    fn autocovariances_telescope_to_the_variance_function() {
        // Var(B_{nh}) = sum of all pairwise increment covariances = (nh)^{2H}.
        for &hv in &[0.3, 0.5, 0.6, 0.75, 0.9] {
            for &spacing in &[0.125, 1.0] {
                // n = 128 exercises lags on both sides of the series switch.
                for n in [1usize, 2, 7, 64, 128] {
                    let mut total = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            total +=
                                increment_autocovariance(i.abs_diff(j), spacing, h(hv)).unwrap();
                        }
                    }
                    let expected = (n as f64 * spacing).powf(2.0 * hv);
                    assert_relative_eq!(total, expected, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn cholesky_single_step_is_one_standard_normal_draw() {
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let spec = RngSpec::new(7, 0);
        let inc = fgn_cholesky(grid, h(0.62), &spec).unwrap();
        let direct: f64 = spec.rng().sample(StandardNormal);
        assert_eq!(inc.len(), 1);
        // Unit spacing: variance h^{2H} = 1, so the draw passes through.
        assert_eq!(inc[0], direct);
    }

    #[test]
    fn cholesky_rejects_oversized_grids() {
        let grid = TimeGrid::new(1.0, CHOLESKY_MAX_STEPS + 1).unwrap();
        assert!(matches!(
            CholeskySampler::new(grid, h(0.75)),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn cholesky_reports_failing_pivot_on_non_psd_input() {
        // A "covariance" row that no stationary process can have.
        let err = cholesky_lower_toeplitz(&[1.0, 2.0, 0.0]).unwrap_err();
        match err {
            Error::NotPositiveDefinite { pivot, .. } => assert_eq!(pivot, 1),
            other => panic!("expected pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn samplers_are_deterministic_per_spec() {
        let grid = TimeGrid::new(1.0, 64).unwrap();
        for hv in [0.3, 0.5, 0.75] {
            let spec = RngSpec::new(1234, 5);
            let a = fgn_circulant(grid, h(hv), &spec).unwrap();
            let b = fgn_circulant(grid, h(hv), &spec).unwrap();
            assert_eq!(a, b);
            let c = fgn_cholesky(grid, h(hv), &spec).unwrap();
            let d = fgn_cholesky(grid, h(hv), &spec).unwrap();
            assert_eq!(c, d);
            let e = fgn_circulant(grid, h(hv), &RngSpec::new(1234, 6)).unwrap();
            assert_ne!(a, e);
        }
    }

    #[test]
    fn circulant_embedding_size_is_smallest_power_of_two() {
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let sampler = CirculantSampler::new(grid, h(0.9)).unwrap();
        assert_eq!(sampler.embedding_size(), 2048);
        let grid = TimeGrid::new(1.0, 1).unwrap();
        assert_eq!(
            CirculantSampler::new(grid, h(0.2))
                .unwrap()
                .embedding_size(),
            2
        );
        let grid = TimeGrid::new(1.0, 1024).unwrap();
        assert_eq!(
            CirculantSampler::new(grid, h(0.5))
                .unwrap()
                .embedding_size(),
            2048
        );
    }

    #[test]
    fn eigenvalue_clamp_rejects_material_negatives_only() {
        let ok = clamp_eigenvalues(&[2.0, 1e-15, -1e-13]).unwrap();
        assert_eq!(ok, vec![2.0, 1e-15, 0.0]);
        assert!(matches!(
            clamp_eigenvalues(&[2.0, -1e-3]),
            Err(Error::EmbeddingNotNonnegativeDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn path_assembly_anchors_and_sums() {
        let grid = TimeGrid::new(1.0, 3).unwrap();
        let path = path_from_increments(grid, h(0.5), &[1.0, -0.5, 0.25]).unwrap();
        assert_eq!(path.values(), &[0.0, 1.0, 0.5, 0.75]);
        assert_eq!(path.terminal(), 0.75);
        assert!(path_from_increments(grid, h(0.5), &[1.0]).is_err());
    }

    #[test]
    fn rescale_applies_self_similarity() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let path = SamplePath::from_values(grid, h(0.5), vec![0.0, 1.0, -2.0]).unwrap();
        let same = rescale_path(&path, 1.0).unwrap();
        assert_eq!(same.values(), path.values());
        // c = 4 at H = 1/2 doubles every value and stretches the horizon to 4.
        let scaled = rescale_path(&path, 4.0).unwrap();
        assert_eq!(scaled.grid().horizon(), 4.0);
        assert_eq!(scaled.grid().steps(), 2);
        assert_eq!(scaled.values(), &[0.0, 2.0, -4.0]);
        assert!(rescale_path(&path, 0.0).is_err());
        assert!(rescale_path(&path, -1.0).is_err());
    }
}
