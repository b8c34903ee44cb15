use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{truncated_mean, SimError, SimulationSpec};
use crate::audit::{FaceRecord, Presence, DEFAULT_ALPHA};
use crate::ingest::{
    write_attribute_csv, write_landmark_csv, AliasEntry, AttrValue, AttributeFile, AttributeFormat, AttributeTable,
    DatasetManifest, LandmarkTable, TestName,
};
use crate::metrics::Scheme;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumMetadata {
    pub attribute: String,
    pub stratum: Presence,
    pub n: u64,
    pub mean: f64,
    pub sigma: f64,
    /// Mean after truncation at zero; what the audit should recover.
    pub truncated_mean: f64,
}

/// Written next to a simulated dataset as `simulation.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationMetadata {
    pub error_model: String,
    pub spec: SimulationSpec,
    pub strata: Vec<StratumMetadata>,
}

impl SimulationMetadata {
    pub fn new(spec: &SimulationSpec) -> Self {
        let strata = spec
            .attributes
            .iter()
            .flat_map(|a| {
                [(Presence::With, a.n_with, a.mean_with), (Presence::Without, a.n_without, a.mean_without)].map(
                    |(stratum, n, mean)| StratumMetadata {
                        attribute: a.name.clone(),
                        stratum,
                        n,
                        mean,
                        sigma: a.sigma,
                        truncated_mean: truncated_mean(mean, a.sigma),
                    },
                )
            })
            .collect();
        Self {
            error_model: "normal truncated at zero".into(),
            spec: spec.clone(),
            strata,
        }
    }
}

fn put(dir: &Path, name: &str, text: &str) -> Result<PathBuf, SimError> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|source| SimError::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

/// Writes `gt.csv`, `pred.csv`, `attributes.csv`, `manifest.json` and
/// `simulation.json` into `dir` in the ingest formats. Returns the manifest
/// path.
pub fn write_dataset(spec: &SimulationSpec, records: &[FaceRecord], dir: &Path) -> Result<PathBuf, SimError> {
    std::fs::create_dir_all(dir).map_err(|source| SimError::Io { path: dir.display().to_string(), source })?;
    let scheme = Scheme::from_id(Scheme::EYES2).expect("built-in scheme");
    let gt: LandmarkTable = records.iter().map(|r| (r.id.clone(), r.gt.clone())).collect();
    let pred: LandmarkTable =
        records.iter().filter_map(|r| r.pred.clone().map(|p| (r.id.clone(), p))).collect();
    let columns: Vec<String> = spec.attributes.iter().map(|a| a.name.clone()).collect();
    let attrs = AttributeTable {
        rows: records
            .iter()
            .map(|r| {
                let row = columns
                    .iter()
                    .map(|c| match r.presence(c) {
                        Presence::With => Some(AttrValue::Flag(true)),
                        Presence::Without => Some(AttrValue::Flag(false)),
                        Presence::Unknown => None,
                    })
                    .collect();
                (r.id.clone(), row)
            })
            .collect(),
        columns: columns.clone(),
    };
    let attrs_csv = write_attribute_csv(&attrs).map_err(SimError::Invalid)?;

    put(dir, "gt.csv", &write_landmark_csv(&gt, &scheme))?;
    put(dir, "pred.csv", &write_landmark_csv(&pred, &scheme))?;
    put(dir, "attributes.csv", &attrs_csv)?;

    let manifest = DatasetManifest {
        dataset: spec.dataset.clone(),
        gt_landmarks: "gt.csv".into(),
        pred_landmarks: "pred.csv".into(),
        attributes: vec![AttributeFile { path: "attributes.csv".into(), format: AttributeFormat::Csv }],
        gt_scheme: Scheme::EYES2.into(),
        pred_scheme: Scheme::EYES2.into(),
        correspondence: None,
        normalization: None,
        aliases: columns
            .iter()
            .map(|c| AliasEntry {
                attribute: c.clone(),
                source: Some(c.clone()),
                invert: false,
                with_values: vec![],
                without_values: vec![],
            })
            .collect(),
        test: TestName::Welch,
        alpha: DEFAULT_ALPHA,
        bonferroni: false,
        permutation_iterations: 10_000,
        seed: spec.seed,
    };
    let meta = SimulationMetadata::new(spec);
    let manifest_path = put(dir, "manifest.json", &pretty(&manifest))?;
    put(dir, "simulation.json", &pretty(&meta))?;
    Ok(manifest_path)
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}
