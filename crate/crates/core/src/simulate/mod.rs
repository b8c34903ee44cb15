//! Seeded synthetic populations with planted per-attribute biases, and
//! test-set composition planning.
//!
//! Simulated faces are geometric: a two-point ground truth 100 px apart and
//! a prediction whose first point is pushed `2 e d` px sideways, so the
//! inter-ocular NME of every record equals its drawn error `e`. Each
//! attribute owns a block of records; within a block only that attribute is
//! annotated and all other simulated attributes are unknown.

mod plan;
mod write;

use std::collections::BTreeMap;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{FaceRecord, Presence};
use crate::exec;
use crate::metrics::{LandmarkSet, Point2D};
use crate::stats::{derived_rng, dist, welch_t_test, PowerSpec, StatsError};

pub use plan::{plan_composition, AttributePlan, CompositionPlan};
pub use write::{write_dataset, SimulationMetadata, StratumMetadata};

/// Inter-ocular distance of every simulated face, in pixels.
pub const EYE_DISTANCE: f64 = 100.0;
pub const DEFAULT_SIGMA: f64 = 0.015;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation spec: {0}")]
    Invalid(String),
    #[error("attribute `{attribute}`: {source}")]
    Power { attribute: String, source: StatsError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn default_dataset() -> String {
    "synthetic".into()
}

fn default_sigma() -> f64 {
    DEFAULT_SIGMA
}

/// Stratum sizes and error distribution for one attribute. Means and sigma
/// are NME fractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSim {
    pub name: String,
    pub n_with: u64,
    pub n_without: u64,
    pub mean_with: f64,
    pub mean_without: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default = "default_dataset")]
    pub dataset: String,
    pub seed: u64,
    pub attributes: Vec<AttributeSim>,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Invalid(m));
        if self.attributes.is_empty() {
            return bad("no attributes".into());
        }
        for (i, a) in self.attributes.iter().enumerate() {
            if a.name.is_empty() {
                return bad(format!("attribute {i} has an empty name"));
            }
            if self.attributes[..i].iter().any(|b| b.name == a.name) {
                return bad(format!("attribute `{}` listed twice", a.name));
            }
            if a.n_with < 2 || a.n_without < 2 {
                return bad(format!("attribute `{}`: each stratum needs at least 2 records", a.name));
            }
            if !(a.sigma.is_finite() && a.sigma > 0.0) {
                return bad(format!("attribute `{}`: sigma must be positive", a.name));
            }
            for m in [a.mean_with, a.mean_without] {
                if !(m.is_finite() && m >= 0.0) {
                    return bad(format!("attribute `{}`: means must be finite and non-negative", a.name));
                }
            }
        }
        Ok(())
    }

    pub fn total_records(&self) -> u64 {
        self.attributes.iter().map(|a| a.n_with + a.n_without).sum()
    }

    /// Attribute, stratum, mean and sigma for the record at `index`.
    fn locate(&self, mut index: u64) -> (usize, Presence, f64, f64) {
        for (i, a) in self.attributes.iter().enumerate() {
            if index < a.n_with {
                return (i, Presence::With, a.mean_with, a.sigma);
            }
            index -= a.n_with;
            if index < a.n_without {
                return (i, Presence::Without, a.mean_without, a.sigma);
            }
            index -= a.n_without;
        }
        unreachable!("index beyond the simulated population")
    }
}

/// Draws from a normal truncated at zero by rejection.
pub fn truncated_normal<R: rand::Rng + ?Sized>(rng: &mut R, mean: f64, sigma: f64) -> f64 {
    let normal = Normal::new(mean, sigma).expect("sigma validated positive");
    loop {
        let x = normal.sample(rng);
        if x >= 0.0 {
            return x;
        }
    }
}

/// Mean of `N(mean, sigma)` truncated to `[0, inf)`.
pub fn truncated_mean(mean: f64, sigma: f64) -> f64 {
    let a = -mean / sigma;
    mean + sigma * dist::normal_pdf(a) / (1.0 - dist::normal_cdf(a))
}

/// Ground truth and prediction whose inter-ocular NME is `error`.
pub fn face_with_error(error: f64) -> (LandmarkSet, LandmarkSet) {
    let gt = vec![Point2D::new(0.0, 0.0), Point2D::new(EYE_DISTANCE, 0.0)];
    let pred = vec![Point2D::new(2.0 * error * EYE_DISTANCE, 0.0), Point2D::new(EYE_DISTANCE, 0.0)];
    (
        LandmarkSet::new("eyes2", gt).expect("two finite points"),
        LandmarkSet::new("eyes2", pred).expect("finite error"),
    )
}

pub fn record_id(index: u64) -> String {
    format!("face{index:07}")
}

/// Generates the population. Record `k` draws from stream `k` of the seed,
/// so output is identical with or without the `parallel` feature.
pub fn simulate_records(spec: &SimulationSpec) -> Result<Vec<FaceRecord>, SimError> {
    spec.validate()?;
    let names: Vec<&str> = spec.attributes.iter().map(|a| a.name.as_str()).collect();
    Ok(exec::map_range(spec.total_records() as usize, |k| {
        let k = k as u64;
        let (attr, presence, mean, sigma) = spec.locate(k);
        let error = truncated_normal(&mut derived_rng(spec.seed, k), mean, sigma);
        let (gt, pred) = face_with_error(error);
        let attributes: BTreeMap<String, Presence> = names
            .iter()
            .enumerate()
            .map(|(i, &n)| (n.to_string(), if i == attr { presence } else { Presence::Unknown }))
            .collect();
        FaceRecord {
            id: record_id(k),
            dataset: spec.dataset.clone(),
            gt,
            pred: Some(pred),
            attributes,
        }
    }))
}

/// Fraction of `replications` seeded two-sample draws of size `n` per group,
/// `N(0, sigma)` against `N(delta, sigma)`, whose Welch p falls below alpha.
pub fn empirical_power(spec: &PowerSpec, n: usize, replications: u64, seed: u64) -> Result<f64, StatsError> {
    spec.validate()?;
    if n < 2 || replications == 0 {
        return Err(StatsError::InvalidParameter("need n >= 2 and at least one replication".into()));
    }
    let a = Normal::new(0.0, spec.sigma).expect("validated");
    let b = Normal::new(spec.delta, spec.sigma).expect("validated");
    let hits = exec::count_range(
        replications as usize,
        || (vec![0.0; n], vec![0.0; n]),
        |(xs, ys), r| {
            let mut rng = derived_rng(seed, r as u64);
            xs.iter_mut().for_each(|x| *x = a.sample(&mut rng));
            ys.iter_mut().for_each(|y| *y = b.sample(&mut rng));
            welch_t_test(xs, ys).is_ok_and(|t| t.p_value < spec.alpha)
        },
    );
    Ok(hits as f64 / replications as f64)
}
