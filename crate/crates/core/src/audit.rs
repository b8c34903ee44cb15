//! Attribute stratification, per-attribute audit rows and cross-dataset
//! trend comparison.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec;
use crate::metrics::{compute_nme, map_landmarks, CorrespondenceMap, LandmarkSet, MetricError, NormalizationSpec};
use crate::stats::{
    binomial_capped, permutation_test, summarize, welch_t_test, PermutationMode, SampleSummary, StatsError,
    TestResult, DEFAULT_EXACT_CAP,
};

/// Significance level used when nothing else is configured.
pub const DEFAULT_ALPHA: f64 = 0.001;
/// Deltas with magnitude below this count as zero when comparing trends.
pub const DEFAULT_ZERO_BAND: f64 = 1e-12;

/// Tri-state attribute value of one face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Presence {
    With,
    Without,
    Unknown,
}

impl Presence {
    pub fn flipped(self) -> Self {
        match self {
            Self::With => Self::Without,
            Self::Without => Self::With,
            Self::Unknown => Self::Unknown,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::With => "with",
            Self::Without => "without",
            Self::Unknown => "unknown",
        }
    }
}

/// One evaluated face. A missing `pred` is a detection failure.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceRecord {
    pub id: String,
    pub dataset: String,
    pub gt: LandmarkSet,
    pub pred: Option<LandmarkSet>,
    pub attributes: BTreeMap<String, Presence>,
}

impl FaceRecord {
    pub fn presence(&self, attribute: &str) -> Presence {
        self.attributes.get(attribute).copied().unwrap_or(Presence::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuditError {
    #[error("attribute `{attribute}`: stratum `{}` has {n} scored records, need at least 2", stratum.as_str())]
    StratumTooSmall { attribute: String, stratum: Presence, n: usize },
    #[error("attribute `{attribute}` is not annotated for any record")]
    Unavailable { attribute: String },
    #[error("record `{record}`: {source}")]
    Metric { record: String, source: MetricError },
    #[error("record `{record}`: no correspondence from `{from}` to `{to}`")]
    NoCorrespondence { record: String, from: String, to: String },
    #[error("no default normalization for scheme `{0}`")]
    NoNormalization(String),
    #[error("attribute `{attribute}`: {source}")]
    Stats { attribute: String, source: StatsError },
    #[error("records span several datasets (`{0}` and `{1}`)")]
    MixedDatasets(String, String),
    #[error("no attributes requested")]
    NoAttributes,
    #[error("trend comparison needs at least 2 datasets, got {0}")]
    TooFewDatasets(usize),
    #[error("duplicate row for attribute `{attribute}` in dataset `{dataset}`")]
    DuplicateRow { attribute: String, dataset: String },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestChoice {
    Welch,
    /// Exact enumeration when the relabeling count fits under `exact_cap`,
    /// Monte-Carlo otherwise.
    Permutation { iterations: u64, seed: u64, exact_cap: u64 },
}

impl TestChoice {
    pub fn permutation(iterations: u64, seed: u64) -> Self {
        Self::Permutation { iterations, seed, exact_cap: DEFAULT_EXACT_CAP }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    /// `None` picks the inter-ocular default of the ground-truth scheme.
    pub normalization: Option<NormalizationSpec>,
    /// `None` uses the built-in map between prediction and ground-truth schemes.
    pub correspondence: Option<CorrespondenceMap>,
    pub test: TestChoice,
    pub alpha: f64,
    pub bonferroni: bool,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            normalization: None,
            correspondence: None,
            test: TestChoice::Welch,
            alpha: DEFAULT_ALPHA,
            bonferroni: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumResult {
    pub label: Presence,
    #[serde(flatten)]
    pub summary: SampleSummary,
}

/// One row of the audit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeAuditRow {
    pub attribute: String,
    pub dataset: String,
    pub with: StratumResult,
    pub without: StratumResult,
    /// `mean(with) - mean(without)` at full precision.
    pub delta: f64,
    pub test: TestResult,
    pub alpha: f64,
    /// Threshold the p-value was compared against (`alpha / m` under Bonferroni).
    pub threshold: f64,
    pub significant: bool,
    pub excluded_missing_pred: u64,
    pub excluded_unknown_attr: u64,
}

/// A row outcome as it appears in a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum AuditEntry {
    Ok(AttributeAuditRow),
    /// The dataset carries no annotation for the attribute.
    Unavailable { attribute: String, dataset: String, reason: String },
    Failed { attribute: String, dataset: String, reason: String },
}

impl AuditEntry {
    pub fn attribute(&self) -> &str {
        match self {
            Self::Ok(row) => &row.attribute,
            Self::Unavailable { attribute, .. } | Self::Failed { attribute, .. } => attribute,
        }
    }

    pub fn dataset(&self) -> &str {
        match self {
            Self::Ok(row) => &row.dataset,
            Self::Unavailable { dataset, .. } | Self::Failed { dataset, .. } => dataset,
        }
    }

    pub fn row(&self) -> Option<&AttributeAuditRow> {
        match self {
            Self::Ok(row) => Some(row),
            _ => None,
        }
    }
}

/// Three-way split of records by one attribute, order preserved.
#[derive(Debug, Default)]
pub struct Strata<'a> {
    pub with: Vec<&'a FaceRecord>,
    pub without: Vec<&'a FaceRecord>,
    pub unknown: Vec<&'a FaceRecord>,
}

pub fn stratify<'a>(records: &'a [FaceRecord], attribute: &str) -> Strata<'a> {
    let mut strata = Strata::default();
    for record in records {
        match record.presence(attribute) {
            Presence::With => strata.with.push(record),
            Presence::Without => strata.without.push(record),
            Presence::Unknown => strata.unknown.push(record),
        }
    }
    strata
}

/// NME of one record, or `None` for a detection failure.
pub fn score_record(record: &FaceRecord, config: &AuditConfig) -> Result<Option<f64>, AuditError> {
    let Some(pred) = &record.pred else {
        return Ok(None);
    };
    let metric_err = |source| AuditError::Metric { record: record.id.clone(), source };
    let mapped;
    let pred = if pred.scheme() == record.gt.scheme() && config.correspondence.is_none() {
        pred
    } else {
        let map = match &config.correspondence {
            Some(map) => map.clone(),
            None => CorrespondenceMap::builtin(pred.scheme(), record.gt.scheme()).ok_or_else(|| {
                AuditError::NoCorrespondence {
                    record: record.id.clone(),
                    from: pred.scheme().id().to_string(),
                    to: record.gt.scheme().id().to_string(),
                }
            })?,
        };
        mapped = map_landmarks(pred, &map).map_err(metric_err)?;
        &mapped
    };
    let default_norm;
    let norm = match &config.normalization {
        Some(n) => n,
        None => {
            default_norm = NormalizationSpec::default_for(record.gt.scheme())
                .ok_or_else(|| AuditError::NoNormalization(record.gt.scheme().id().to_string()))?;
            &default_norm
        }
    };
    compute_nme(pred, &record.gt, norm).map(Some).map_err(metric_err)
}

/// Scores every record, in parallel when enabled.
pub fn score_records(records: &[FaceRecord], config: &AuditConfig) -> Vec<Result<Option<f64>, AuditError>> {
    exec::map_slice(records, |r| score_record(r, config))
}

fn dataset_of(records: &[FaceRecord]) -> Result<String, AuditError> {
    let mut iter = records.iter();
    let Some(first) = iter.next() else {
        return Ok(String::new());
    };
    match iter.find(|r| r.dataset != first.dataset) {
        Some(other) => Err(AuditError::MixedDatasets(first.dataset.clone(), other.dataset.clone())),
        None => Ok(first.dataset.clone()),
    }
}

fn run_test(with: &[f64], without: &[f64], choice: TestChoice) -> Result<TestResult, StatsError> {
    match choice {
        TestChoice::Welch => welch_t_test(with, without),
        TestChoice::Permutation { iterations, seed, exact_cap } => {
            let n = (with.len() + without.len()) as u64;
            let mode = match binomial_capped(n, with.len() as u64, exact_cap) {
                Some(_) => PermutationMode::Exact { cap: exact_cap },
                None => PermutationMode::MonteCarlo { iterations, seed },
            };
            permutation_test(with, without, mode)
        }
    }
}

fn audit_scored(
    records: &[FaceRecord],
    scores: &[Result<Option<f64>, AuditError>],
    dataset: &str,
    attribute: &str,
    config: &AuditConfig,
) -> Result<AttributeAuditRow, AuditError> {
    let mut with = Vec::new();
    let mut without = Vec::new();
    let (mut missing, mut unknown) = (0u64, 0u64);
    for (record, score) in records.iter().zip(scores) {
        let bucket = match record.presence(attribute) {
            Presence::Unknown => {
                unknown += 1;
                continue;
            }
            Presence::With => &mut with,
            Presence::Without => &mut without,
        };
        match score {
            Ok(Some(nme)) => bucket.push(*nme),
            Ok(None) => missing += 1,
            Err(e) => return Err(e.clone()),
        }
    }
    if unknown as usize == records.len() {
        return Err(AuditError::Unavailable { attribute: attribute.to_string() });
    }
    for (stratum, values) in [(Presence::With, &with), (Presence::Without, &without)] {
        if values.len() < 2 {
            return Err(AuditError::StratumTooSmall {
                attribute: attribute.to_string(),
                stratum,
                n: values.len(),
            });
        }
    }
    let stats_err = |source| AuditError::Stats { attribute: attribute.to_string(), source };
    let sw = summarize(&with).map_err(stats_err)?;
    let so = summarize(&without).map_err(stats_err)?;
    let test = run_test(&with, &without, config.test).map_err(stats_err)?;
    Ok(AttributeAuditRow {
        attribute: attribute.to_string(),
        dataset: dataset.to_string(),
        with: StratumResult { label: Presence::With, summary: sw },
        without: StratumResult { label: Presence::Without, summary: so },
        delta: sw.mean - so.mean,
        significant: test.p_value < config.alpha,
        test,
        alpha: config.alpha,
        threshold: config.alpha,
        excluded_missing_pred: missing,
        excluded_unknown_attr: unknown,
    })
}

fn check_alpha(alpha: f64) -> Result<(), AuditError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(AuditError::InvalidAlpha(alpha))
    }
}

/// Scores, stratifies and tests one attribute.
pub fn audit_attribute(
    records: &[FaceRecord],
    attribute: &str,
    config: &AuditConfig,
) -> Result<AttributeAuditRow, AuditError> {
    check_alpha(config.alpha)?;
    let dataset = dataset_of(records)?;
    let scores = score_records(records, config);
    audit_scored(records, &scores, &dataset, attribute, config)
}

/// One entry per attribute. Failures are reported per row instead of
/// aborting the dataset. Under Bonferroni the threshold is `alpha / m` with
/// `m` the number of attributes that were actually tested.
pub fn audit_dataset(
    records: &[FaceRecord],
    attributes: &[String],
    config: &AuditConfig,
) -> Result<Vec<AuditEntry>, AuditError> {
    if attributes.is_empty() {
        return Err(AuditError::NoAttributes);
    }
    check_alpha(config.alpha)?;
    let dataset = dataset_of(records)?;
    let scores = score_records(records, config);
    let mut entries = exec::map_slice(attributes, |attribute| {
        match audit_scored(records, &scores, &dataset, attribute, config) {
            Ok(row) => AuditEntry::Ok(row),
            Err(err @ AuditError::Unavailable { .. }) => AuditEntry::Unavailable {
                attribute: attribute.clone(),
                dataset: dataset.clone(),
                reason: err.to_string(),
            },
            Err(err) => AuditEntry::Failed {
                attribute: attribute.clone(),
                dataset: dataset.clone(),
                reason: err.to_string(),
            },
        }
    });
    if config.bonferroni {
        let tested = entries.iter().filter(|e| e.row().is_some()).count();
        let threshold = config.alpha / tested.max(1) as f64;
        for entry in &mut entries {
            if let AuditEntry::Ok(row) = entry {
                row.threshold = threshold;
                row.significant = row.test.p_value < threshold;
            }
        }
    }
    Ok(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaSign {
    Negative,
    Zero,
    Positive,
    Unavailable,
}

impl DeltaSign {
    pub fn of(delta: f64, zero_band: f64) -> Self {
        if delta.abs() < zero_band {
            Self::Zero
        } else if delta < 0.0 {
            Self::Negative
        } else {
            Self::Positive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSign {
    pub dataset: String,
    pub sign: DeltaSign,
}

/// Whether one attribute's bias points the same way in every dataset that
/// measured it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrendComparison {
    pub attribute: String,
    pub signs: Vec<DatasetSign>,
    pub agreement: bool,
}

/// Compares delta signs per attribute across datasets. Attributes and
/// datasets keep their order of first appearance.
pub fn compare_trends(entries: &[AuditEntry], zero_band: f64) -> Result<Vec<TrendComparison>, AuditError> {
    let mut datasets: Vec<&str> = Vec::new();
    let mut attributes: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(&str, &str), DeltaSign> = BTreeMap::new();
    for entry in entries {
        let (attribute, dataset) = (entry.attribute(), entry.dataset());
        if !datasets.contains(&dataset) {
            datasets.push(dataset);
        }
        if !attributes.contains(&attribute) {
            attributes.push(attribute);
        }
        let sign = entry.row().map_or(DeltaSign::Unavailable, |r| DeltaSign::of(r.delta, zero_band));
        if cells.insert((attribute, dataset), sign).is_some() {
            return Err(AuditError::DuplicateRow {
                attribute: attribute.to_string(),
                dataset: dataset.to_string(),
            });
        }
    }
    if datasets.len() < 2 {
        return Err(AuditError::TooFewDatasets(datasets.len()));
    }
    Ok(attributes
        .into_iter()
        .map(|attribute| {
            let signs: Vec<DatasetSign> = datasets
                .iter()
                .map(|&dataset| DatasetSign {
                    dataset: dataset.to_string(),
                    sign: cells.get(&(attribute, dataset)).copied().unwrap_or(DeltaSign::Unavailable),
                })
                .collect();
            let available: Vec<DeltaSign> =
                signs.iter().map(|s| s.sign).filter(|&s| s != DeltaSign::Unavailable).collect();
            let agreement = available.len() >= 2 && available.iter().all(|&s| s == available[0]);
            TrendComparison { attribute: attribute.to_string(), signs, agreement }
        })
        .collect())
}
