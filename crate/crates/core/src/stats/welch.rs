use super::dist::student_t_two_sided;
use super::{summarize, StatsError, TestDetail, TestMethod, TestResult};

/// Welch's unequal-variance two-sample t-test, two-sided.
///
/// When both groups have zero variance the statistic is undefined: equal
/// means give `p = 1`, different means give the smallest positive `p` with a
/// signed `f64::MAX` statistic and `degenerate_variance` set.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TestResult, StatsError> {
    for group in [a, b] {
        if group.len() < 2 {
            return Err(StatsError::GroupTooSmall {
                needed: 2,
                got: group.len(),
            });
        }
    }
    let (sa, sb) = (summarize(a)?, summarize(b)?);
    let (va, vb) = (sa.sem2().unwrap_or(0.0), sb.sem2().unwrap_or(0.0));
    let diff = sa.mean - sb.mean;
    let se2 = va + vb;

    if se2 == 0.0 {
        let pooled_df = (a.len() + b.len() - 2) as f64;
        return Ok(if diff == 0.0 {
            TestResult {
                method: TestMethod::WelchT,
                statistic: 0.0,
                p_value: 1.0,
                detail: TestDetail::DegreesOfFreedom(pooled_df),
                degenerate_variance: true,
            }
        } else {
            TestResult {
                method: TestMethod::WelchT,
                statistic: f64::MAX.copysign(diff),
                p_value: f64::MIN_POSITIVE,
                detail: TestDetail::DegreesOfFreedom(pooled_df),
                degenerate_variance: true,
            }
        });
    }

    let t = diff / se2.sqrt();
    // Welch-Satterthwaite
    let df_den = va * va / (sa.n - 1) as f64 + vb * vb / (sb.n - 1) as f64;
    let df = se2 * se2 / df_den;
    let p = student_t_two_sided(t, df).max(f64::MIN_POSITIVE);
    Ok(TestResult {
        method: TestMethod::WelchT,
        statistic: t,
        p_value: p,
        detail: TestDetail::DegreesOfFreedom(df),
        degenerate_variance: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::derived_rng;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn df(r: &TestResult) -> f64 {
        match r.detail {
            TestDetail::DegreesOfFreedom(d) => d,
            other => panic!("unexpected detail {other:?}"),
        }
    }

    #[test]
    fn identical_groups() {
        let r = welch_t_test(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
        assert!(!r.degenerate_variance);
    }

    #[test]
    fn reference_value() {
        // scipy.stats.ttest_ind(a, b, equal_var=False)
        let a = [19.8, 20.4, 19.6, 17.8, 18.5, 18.9, 18.3, 18.9, 19.5, 22.0];
        let b = [28.2, 26.6, 20.1, 23.3, 25.2, 22.1, 17.7, 27.6, 20.6, 13.7, 23.2, 17.5, 20.6, 18.0, 23.9, 21.6, 24.3, 20.4, 24.0, 13.2];
        let r = welch_t_test(&a, &b).unwrap();
        assert!((r.statistic - -2.2192409158236233).abs() < 1e-12);
        assert!((df(&r) - 24.496223124201244).abs() < 1e-10);
        assert!((r.p_value - 0.03597227102979685).abs() < 1e-12);
    }

    #[test]
    fn degenerate_variances() {
        let r = welch_t_test(&[2.0, 2.0], &[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((r.p_value, r.degenerate_variance), (1.0, true));
        let r = welch_t_test(&[2.0, 2.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(r.p_value, f64::MIN_POSITIVE);
        assert!(r.degenerate_variance && r.statistic < 0.0);
    }

    #[test]
    fn too_small() {
        assert_eq!(
            welch_t_test(&[1.0], &[1.0, 2.0]),
            Err(StatsError::GroupTooSmall { needed: 2, got: 1 })
        );
    }

    #[test]
    fn detects_table_scale_gap() {
        let mut rng = derived_rng(20240101, 0);
        let a: Vec<f64> = Normal::new(4.41, 1.5).unwrap().sample_iter(&mut rng).take(5000).collect();
        let b: Vec<f64> = Normal::new(4.81, 1.5).unwrap().sample_iter(&mut rng).take(5000).collect();
        let r = welch_t_test(&a, &b).unwrap();
        assert!(r.p_value < 1e-3, "p = {}", r.p_value);
        assert!(r.statistic < 0.0);
    }

    #[test]
    fn extreme_separation_keeps_p_positive() {
        let a: Vec<f64> = (0..1000).map(|i| 100.0 + (i % 3) as f64 * 1e-3).collect();
        let b: Vec<f64> = (0..1000).map(|i| (i % 5) as f64 * 1e-3).collect();
        let r = welch_t_test(&a, &b).unwrap();
        assert!(r.p_value > 0.0 && r.p_value < 1e-300);
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    proptest! {
        #[test]
        fn swap_negates_statistic(
            a in prop::collection::vec(-10.0f64..10.0, 2..40),
            b in prop::collection::vec(-10.0f64..10.0, 2..40),
        ) {
            let ab = welch_t_test(&a, &b).unwrap();
            let ba = welch_t_test(&b, &a).unwrap();
            prop_assert_eq!(ab.statistic, -ba.statistic);
            prop_assert_eq!(ab.p_value, ba.p_value);
        }

        #[test]
        fn shift_and_scale_invariant(
            a in prop::collection::vec(0.0f64..1.0, 3..40),
            b in prop::collection::vec(0.0f64..1.0, 3..40),
            shift in -5.0f64..5.0,
            scale in 0.25f64..4.0,
        ) {
            let base = welch_t_test(&a, &b).unwrap();
            let shifted = welch_t_test(
                &a.iter().map(|x| x + shift).collect::<Vec<_>>(),
                &b.iter().map(|x| x + shift).collect::<Vec<_>>(),
            ).unwrap();
            let scaled = welch_t_test(
                &a.iter().map(|x| x * scale).collect::<Vec<_>>(),
                &b.iter().map(|x| x * scale).collect::<Vec<_>>(),
            ).unwrap();
            // Shifting re-rounds the inputs, so allow a little more than
            // pure arithmetic noise on the statistic.
            prop_assert!(rel(base.statistic, shifted.statistic) < 1e-9 || (base.statistic - shifted.statistic).abs() < 1e-12);
            prop_assert!((base.p_value - shifted.p_value).abs() < 1e-9);
            prop_assert!(rel(base.statistic, scaled.statistic) < 1e-12 || (base.statistic - scaled.statistic).abs() < 1e-13);
            prop_assert!((base.p_value - scaled.p_value).abs() < 1e-12);
        }
    }
}
