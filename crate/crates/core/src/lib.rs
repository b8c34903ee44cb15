//! Subgroup bias audits for facial-landmark detectors.
//!
//! The pipeline scores every face with a Normalized Mean Error ([`metrics`]),
//! splits the scores by appearance attributes and tests the difference of the
//! stratum means ([`audit`], [`stats`]), and compares the sign of those
//! differences across datasets. [`ingest`] reads the landmark and attribute
//! files, [`simulate`] produces seeded populations with planted biases and
//! plans synthetic test-set sizes, and [`report`] renders the resulting
//! tables.
//!
//! With the default `parallel` feature the per-record and per-iteration loops
//! run on rayon; without it they run sequentially. Both paths produce
//! identical results because every randomized loop derives its RNG stream
//! from `(seed, index)`.

pub mod audit;
pub mod exec;
pub mod ingest;
pub mod metrics;
pub mod report;
pub mod simulate;
pub mod stats;

pub use audit::{
    audit_attribute, audit_dataset, compare_trends, stratify, AttributeAuditRow, AuditConfig,
    AuditEntry, AuditError, DeltaSign, FaceRecord, Presence, StratumResult, TestChoice,
    TrendComparison,
};
pub use metrics::{
    compute_nme, map_landmarks, normalizer, CorrespondenceMap, LandmarkSet, MetricError,
    NormalizationSpec, Point2D, Scheme,
};
pub use stats::{
    bootstrap_mean_diff_ci, permutation_test, required_sample_size, summarize, welch_t_test,
    PermutationMode, PowerSpec, SampleSummary, StatsError, TestMethod, TestResult,
};
