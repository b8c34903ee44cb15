use rand::Rng;

use super::{check_finite, derived_rng, StatsError, TestDetail, TestMethod, TestResult};
use crate::exec;

/// Largest relabeling count exact mode will enumerate by default.
pub const DEFAULT_EXACT_CAP: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationMode {
    /// Enumerate every split of the pooled sample, up to `cap` splits.
    Exact { cap: u64 },
    /// Random relabelings with the observed labeling counted once.
    MonteCarlo { iterations: u64, seed: u64 },
}

/// `C(n, k)` if it does not exceed `cap`.
pub fn binomial_capped(n: u64, k: u64, cap: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(cap) {
            return None;
        }
    }
    Some(acc as u64)
}

struct Pool {
    values: Vec<f64>,
    n_a: usize,
    total: f64,
    tolerance: f64,
    observed: f64,
}

impl Pool {
    fn new(a: &[f64], b: &[f64]) -> Self {
        let values: Vec<f64> = a.iter().chain(b).copied().collect();
        let total = values.iter().sum();
        let max_abs = values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut pool = Self {
            n_a: a.len(),
            total,
            tolerance: 64.0 * f64::EPSILON * values.len() as f64 * max_abs,
            observed: 0.0,
            values,
        };
        pool.observed = pool.diff(pool.values[..pool.n_a].iter().sum());
        pool
    }

    fn diff(&self, sum_a: f64) -> f64 {
        let n_b = (self.values.len() - self.n_a) as f64;
        sum_a / self.n_a as f64 - (self.total - sum_a) / n_b
    }

    /// Relabeling at least as extreme as the observed one, ties included.
    fn extreme(&self, sum_a: f64) -> bool {
        self.diff(sum_a).abs() >= self.observed.abs() - self.tolerance
    }
}

/// Two-sided permutation test on the difference of means, `mean(a) - mean(b)`.
pub fn permutation_test(a: &[f64], b: &[f64], mode: PermutationMode) -> Result<TestResult, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::Empty);
    }
    check_finite(a)?;
    check_finite(b)?;
    let pool = Pool::new(a, b);
    let n = pool.values.len();

    match mode {
        PermutationMode::Exact { cap } => {
            let count = binomial_capped(n as u64, a.len() as u64, cap)
                .ok_or(StatsError::ExactOverCap { cap })?;
            // Each subset of the smaller side fixes one split.
            let k = pool.n_a.min(n - pool.n_a);
            let picks_a = k == pool.n_a;
            let mut idx: Vec<usize> = (0..k).collect();
            let mut hits = 0u64;
            let mut seen = 0u64;
            loop {
                let sum: f64 = idx.iter().map(|&i| pool.values[i]).sum();
                hits += u64::from(pool.extreme(if picks_a { sum } else { pool.total - sum }));
                seen += 1;
                if !next_combination(&mut idx, n) {
                    break;
                }
            }
            debug_assert_eq!(seen, count);
            Ok(TestResult {
                method: TestMethod::PermutationExact,
                statistic: pool.observed,
                p_value: hits as f64 / count as f64,
                detail: TestDetail::Permutations(count),
                degenerate_variance: false,
            })
        }
        PermutationMode::MonteCarlo { iterations, seed } => {
            if iterations == 0 {
                return Err(StatsError::InvalidParameter("iterations must be positive".into()));
            }
            // Draw the smaller side by a partial Fisher-Yates shuffle, then
            // undo the swaps so every iteration starts from the same buffer.
            let k = pool.n_a.min(n - pool.n_a);
            let picks_a = k == pool.n_a;
            let hits = exec::count_range(
                iterations as usize,
                || (pool.values.clone(), Vec::with_capacity(k)),
                |(buf, swaps): &mut (Vec<f64>, Vec<usize>), i| {
                    let mut rng = derived_rng(seed, i as u64);
                    swaps.clear();
                    for j in 0..k {
                        let s = rng.random_range(j..n);
                        buf.swap(j, s);
                        swaps.push(s);
                    }
                    let sum: f64 = buf[..k].iter().sum();
                    for (j, &s) in swaps.iter().enumerate().rev() {
                        buf.swap(j, s);
                    }
                    pool.extreme(if picks_a { sum } else { pool.total - sum })
                },
            );
            Ok(TestResult {
                method: TestMethod::PermutationMontecarlo,
                statistic: pool.observed,
                p_value: (hits + 1) as f64 / (iterations + 1) as f64,
                detail: TestDetail::Permutations(iterations),
                degenerate_variance: false,
            })
        }
    }
}

/// Advances `idx` to the next k-subset of `0..n` in lexicographic order.
fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
        return false;
    };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}
