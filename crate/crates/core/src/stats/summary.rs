use serde::{Deserialize, Serialize};

use super::{check_finite, StatsError};

/// Count, mean and unbiased variance of a sample.
///
/// `variance` is `None` for a single observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: u64,
    pub mean: f64,
    pub variance: Option<f64>,
}

impl SampleSummary {
    pub fn std_dev(&self) -> Option<f64> {
        self.variance.map(f64::sqrt)
    }

    /// Squared standard error of the mean.
    pub fn sem2(&self) -> Option<f64> {
        self.variance.map(|v| v / self.n as f64)
    }
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn summary(&self) -> Option<SampleSummary> {
        (self.n > 0).then(|| SampleSummary {
            n: self.n,
            mean: self.mean,
            variance: (self.n > 1).then(|| (self.m2 / (self.n - 1) as f64).max(0.0)),
        })
    }
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary, StatsError> {
    check_finite(samples)?;
    let mut acc = RunningStats::new();
    samples.iter().for_each(|&x| acc.push(x));
    acc.summary().ok_or(StatsError::Empty)
}
