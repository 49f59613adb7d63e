//! Shared helpers for the criterion benchmarks: deterministic stream
//! construction so benchmark inputs are reproducible run to run.

use fbmx_core::{ensemble_stream, RngSpec};
use rand_chacha::ChaCha8Rng;

pub const BENCH_SEED: u64 = 0xBE7C;

/// Deterministic generator for replication `i` of the benchmark family.
pub fn bench_rng(replication: u32) -> ChaCha8Rng {
    RngSpec::new(BENCH_SEED, ensemble_stream(0, replication)).rng()
}
