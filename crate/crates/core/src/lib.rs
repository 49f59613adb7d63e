//! Exact simulation of fractional Brownian motion, extreme-value path
//! functionals, closed-form bounds on their laws, and Monte Carlo
//! verification suites.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: validated domain types (Hurst parameter, time grid, anchored
//!   sample path) and the counter-based random-stream scheme;
//! - [`generate`]: exact Gaussian samplers — dense Cholesky for small grids
//!   and the circulant-embedding FFT sampler for large ones — plus the
//!   self-similarity rescaling;
//! - [`functionals`]: supremum, reflected supremum, terminal gap, maximum
//!   drawdown, and censored level-1 hitting times of a sampled path;
//! - [`bounds`]: the closed-form moment, tail, Laplace-transform and
//!   gap-distribution bounds, with quadrature cross-checks;
//! - [`stats`]: deterministic estimators (pairwise summation, Wilson
//!   intervals, restricted two-sample Kolmogorov–Smirnov test);
//! - [`ensemble`]: parallel, bit-reproducible Monte Carlo ensembles;
//! - [`verify`]: named verification suites that compare ensembles against
//!   the closed forms and emit machine-readable reports;
//! - [`risk`]: the geometric price model driven by the same paths, with
//!   drawdown/gap risk statistics.
//!
//! Determinism contract: all randomness derives from one master seed
//! through per-replication counter-based streams, and aggregation uses
//! pairwise summation in fixed order, so every result is bit-identical
//! across runs and worker-thread counts.

pub mod bounds;
pub mod ensemble;
pub mod error;
pub mod functionals;
pub mod generate;
pub mod grid;
pub mod risk;
pub mod stats;
pub mod verify;

pub use bounds::{
    exp_half_moment, expected_sup_unit_bound, first_moment_bound, gamma_moment,
    gamma_moment_quadrature, gap_cdf_lower_bound, laplace_transform_bound, markov_tail_bound,
    refined_tail_bound, second_moment_bound, ClampedBound,
};
pub use ensemble::{simulate_ensemble, Ensemble, Extent, SimulationConfig};
pub use error::{Error, Result};
pub use functionals::{
    first_hitting_time, max_drawdown, reflected_supremum, running_supremum, supremum, terminal_gap,
    write_records_csv, FunctionalRecord, HittingOutcome,
};
pub use generate::{
    covariance, fgn_cholesky, fgn_circulant, increment_autocovariance, path_from_increments,
    rescale_path, CholeskySampler, CirculantSampler,
};
pub use grid::{ensemble_stream, Hurst, RngSpec, SamplePath, TimeGrid};
pub use risk::{
    drawdown_report, fbs_price_path, scaled_gap_risk_bound, QuantileRow, RiskModelParams,
    RiskReport,
};
pub use verify::{
    bm_sanity_suite, overall_exit_code, parse_suites, run_suites, verify_exponential_sup,
    verify_gap_bound, verify_laplace_bound, verify_law_identity_onesided,
    verify_law_identity_reflected, verify_second_moment, verify_tail_bounds, Analytic, Empirical,
    Suite, Verdict, VerificationReport, SUITE_LIST,
};
