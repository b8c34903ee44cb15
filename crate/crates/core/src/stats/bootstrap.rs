use std::cmp::Ordering;

use rand::Rng;

use super::{check_finite, derived_rng, StatsError};
use crate::exec;

/// Percentile bootstrap interval for `mean(a) - mean(b)`.
///
/// Each group draws from its own stream, assigned by a content ordering of
/// the two groups rather than by argument position, so swapping two distinct
/// groups yields exactly the negated interval.
pub fn bootstrap_mean_diff_ci(
    a: &[f64],
    b: &[f64],
    level: f64,
    iterations: u64,
    seed: u64,
) -> Result<(f64, f64), StatsError> {
    for group in [a, b] {
        if group.is_empty() {
            return Err(StatsError::Empty);
        }
        if group.len() < 2 {
            return Err(StatsError::GroupTooSmall { needed: 2, got: group.len() });
        }
        check_finite(group)?;
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::InvalidParameter(format!("level must lie in (0, 1), got {level}")));
    }
    if iterations == 0 {
        return Err(StatsError::InvalidParameter("iterations must be positive".into()));
    }

    let a_first = content_order(a, b) != Ordering::Greater;
    let (stream_a, stream_b) = if a_first { (0, 1) } else { (1, 0) };
    let mut diffs = exec::map_range(iterations as usize, |i| {
        let i = i as u64;
        resample_mean(a, seed, 2 * i + stream_a) - resample_mean(b, seed, 2 * i + stream_b)
    });
    diffs.sort_by(f64::total_cmp);

    // Interpolate both ends from the same offset so the pair is symmetric.
    let last = (diffs.len() - 1) as f64;
    let h = last * (1.0 - level) / 2.0;
    let f = h.floor() as usize;
    let frac = h - f as f64;
    let top = diffs.len() - 1 - f;
    let lo = match diffs.get(f + 1) {
        Some(&next) => diffs[f] + frac * (next - diffs[f]),
        None => diffs[f],
    };
    let hi = match top.checked_sub(1) {
        Some(prev) => diffs[top] - frac * (diffs[top] - diffs[prev]),
        None => diffs[top],
    };
    Ok((lo, hi))
}

fn resample_mean(xs: &[f64], seed: u64, stream: u64) -> f64 {
    let mut rng = derived_rng(seed, stream);
    let n = xs.len();
    let sum: f64 = (0..n).map(|_| xs[rng.random_range(0..n)]).sum();
    sum / n as f64
}

fn content_order(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn constant_groups_collapse() {
        let ci = bootstrap_mean_diff_ci(&[2.0; 10], &[2.0; 7], 0.95, 500, 3).unwrap();
        assert_eq!(ci, (0.0, 0.0));
    }

    #[test]
    fn planted_difference_is_covered() {
        let mut rng = derived_rng(99, 0);
        let a: Vec<f64> = Normal::new(3.5, 1.5).unwrap().sample_iter(&mut rng).take(5000).collect();
        let b: Vec<f64> = Normal::new(3.0, 1.5).unwrap().sample_iter(&mut rng).take(5000).collect();
        let (lo, hi) = bootstrap_mean_diff_ci(&a, &b, 0.95, 2000, 11).unwrap();
        assert!(lo < 0.5 && 0.5 < hi, "({lo}, {hi})");
        assert!(lo > 0.0);
        // CLT width: 2 * 1.96 * 1.5 * sqrt(2 / 5000) ~= 0.118
        let width = hi - lo;
        assert!((width - 0.1176).abs() < 0.02, "width {width}");
    }

    #[test]
    fn swap_negates_exactly() {
        let a = [0.1, 0.4, 0.35, 0.8, 0.2, 0.55];
        let b = [0.3, 0.9, 0.75, 0.6, 0.65];
        let (lo, hi) = bootstrap_mean_diff_ci(&a, &b, 0.9, 1001, 5).unwrap();
        let (lo2, hi2) = bootstrap_mean_diff_ci(&b, &a, 0.9, 1001, 5).unwrap();
        assert_eq!((lo2, hi2), (-hi, -lo));
        assert!(lo < hi);
    }

    #[test]
    fn deterministic_and_validated() {
        let a = [1.0, 2.0, 3.0];
        let b = [2.0, 4.0];
        assert_eq!(
            bootstrap_mean_diff_ci(&a, &b, 0.95, 300, 8).unwrap(),
            bootstrap_mean_diff_ci(&a, &b, 0.95, 300, 8).unwrap()
        );
        assert_eq!(bootstrap_mean_diff_ci(&[], &b, 0.95, 10, 0), Err(StatsError::Empty));
        assert!(bootstrap_mean_diff_ci(&a, &b, 1.0, 10, 0).is_err());
        assert!(bootstrap_mean_diff_ci(&[1.0], &b, 0.5, 10, 0).is_err());
    }
}
