use serde::{Deserialize, Serialize};

use super::dist::normal_quantile;
use super::StatsError;

/// Inputs to the two-sample normal-approximation sample-size formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSpec {
    /// Smallest absolute mean difference worth detecting.
    pub delta: f64,
    /// Common standard deviation of both groups.
    pub sigma: f64,
    /// Two-sided significance level.
    pub alpha: f64,
    pub power: f64,
}

impl PowerSpec {
    pub fn validate(&self) -> Result<(), StatsError> {
        let bad = |msg: String| Err(StatsError::InvalidParameter(msg));
        if !self.delta.is_finite() || self.delta == 0.0 {
            return bad(format!("delta must be finite and non-zero, got {}", self.delta));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.power > 0.0 && self.power < 1.0) {
            return bad(format!("power must lie in (0, 1), got {}", self.power));
        }
        Ok(())
    }

    /// `2 (z_{1-alpha/2} + z_power)^2 sigma^2 / delta^2` before rounding up.
    pub fn raw_sample_size(&self) -> Result<f64, StatsError> {
        self.validate()?;
        let z = normal_quantile(1.0 - self.alpha / 2.0) + normal_quantile(self.power);
        Ok(2.0 * z * z * self.sigma * self.sigma / (self.delta * self.delta))
    }
}

/// Per-group sample size for a two-sided two-sample comparison of means.
pub fn required_sample_size(spec: &PowerSpec) -> Result<u64, StatsError> {
    Ok(spec.raw_sample_size()?.ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(delta: f64, sigma: f64, alpha: f64, power: f64) -> PowerSpec {
        PowerSpec { delta, sigma, alpha, power }
    }

    #[test]
    fn textbook_case() {
        let s = spec(0.5, 1.0, 0.05, 0.8);
        // 2 * (1.959963984540054 + 0.8416212335729143)^2 / 0.25
        let expected = 2.0 * (1.959963984540054f64 + 0.8416212335729143).powi(2) / 0.25;
        assert!((s.raw_sample_size().unwrap() - expected).abs() < 1e-10);
        assert!((expected - 62.79).abs() < 0.01);
        assert_eq!(required_sample_size(&s).unwrap(), 63);
    }

    #[test]
    fn half_power_has_no_beta_term() {
        assert_eq!(required_sample_size(&spec(1.0, 1.0, 0.05, 0.5)).unwrap(), 8);
    }

    #[test]
    fn doubling_delta_quarters_n() {
        let a = spec(0.3, 1.2, 0.01, 0.9).raw_sample_size().unwrap();
        let b = spec(0.6, 1.2, 0.01, 0.9).raw_sample_size().unwrap();
        assert!((a / b - 4.0).abs() < 1e-12);
    }

    #[test]
    fn negative_delta_is_symmetric() {
        assert_eq!(
            required_sample_size(&spec(-0.5, 1.0, 0.05, 0.8)).unwrap(),
            required_sample_size(&spec(0.5, 1.0, 0.05, 0.8)).unwrap()
        );
    }

    #[test]
    fn invalid_specs() {
        for s in [
            spec(0.0, 1.0, 0.05, 0.8),
            spec(0.5, 0.0, 0.05, 0.8),
            spec(0.5, 1.0, 1.0, 0.8),
            spec(0.5, 1.0, 0.05, 0.0),
            spec(f64::NAN, 1.0, 0.05, 0.8),
        ] {
            assert!(matches!(required_sample_size(&s), Err(StatsError::InvalidParameter(_))));
        }
    }

    proptest! {
        #[test]
        fn monotone(
            delta in 0.01f64..5.0,
            sigma in 0.01f64..5.0,
            alpha in 0.0001f64..0.5,
            power in 0.05f64..0.99,
            bump in 1.01f64..3.0,
        ) {
            // Below alpha / 2 the squared quantile sum shrinks as power grows.
            prop_assume!(power >= alpha / 2.0);
            let base = spec(delta, sigma, alpha, power);
            let n = required_sample_size(&base).unwrap();
            prop_assert!(required_sample_size(&spec(delta * bump, sigma, alpha, power)).unwrap() <= n);
            prop_assert!(required_sample_size(&spec(delta, sigma * bump, alpha, power)).unwrap() >= n);
            let higher = (power + (1.0 - power) * (1.0 - 1.0 / bump)).min(0.999);
            prop_assert!(required_sample_size(&spec(delta, sigma, alpha, higher)).unwrap() >= n);
            prop_assert!(required_sample_size(&spec(delta, sigma, alpha / bump, power)).unwrap() >= n);
        }
    }
}
