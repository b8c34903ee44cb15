//! Descriptive statistics, two-sample tests, bootstrap intervals and
//! sample-size planning.
//!
//! Randomized routines take an explicit seed and give every iteration its own
//! ChaCha stream, so results do not depend on thread count.

mod bootstrap;
pub mod dist;
mod permutation;
mod power;
mod summary;
mod welch;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bootstrap::bootstrap_mean_diff_ci;
pub use permutation::{binomial_capped, permutation_test, PermutationMode, DEFAULT_EXACT_CAP};
pub use power::{required_sample_size, PowerSpec};
pub use summary::{summarize, RunningStats, SampleSummary};
pub use welch::welch_t_test;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("empty sample")]
    Empty,
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("group too small: need at least {needed} values, got {got}")]
    GroupTooSmall { needed: usize, got: usize },
    #[error("exact enumeration needs more than {cap} relabelings")]
    ExactOverCap { cap: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    WelchT,
    PermutationExact,
    PermutationMontecarlo,
}

impl TestMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::WelchT => "welch-t",
            Self::PermutationExact => "permutation-exact",
            Self::PermutationMontecarlo => "permutation-montecarlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestDetail {
    DegreesOfFreedom(f64),
    Permutations(u64),
}

/// Outcome of a two-sample test. `p_value` is two-sided and lies in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub detail: TestDetail,
    /// Both groups had zero variance; the statistic is a sentinel.
    #[serde(default)]
    pub degenerate_variance: bool,
}

fn check_finite(xs: &[f64]) -> Result<(), StatsError> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(StatsError::NonFinite(i)),
        None => Ok(()),
    }
}

/// ChaCha8 stream `stream` under `seed`; children of one seed never overlap.
pub(crate) fn derived_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
