use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::attributes::{parse_attribute_csv, parse_attribute_jsonl, parse_celeba_attributes, AttrValue, AttributeTable};
use super::landmarks::{parse_landmark_csv, LandmarkTable};
use super::{IngestError, ParseError};
use crate::audit::{AuditConfig, FaceRecord, Presence, TestChoice, DEFAULT_ALPHA};
use crate::exec;
use crate::metrics::{CorrespondenceMap, NormalizationSpec, Scheme};
use crate::stats::DEFAULT_EXACT_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttributeFormat {
    CelebaAttr,
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeFile {
    pub path: PathBuf,
    pub format: AttributeFormat,
}

/// Maps one canonical attribute onto a dataset's source column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliasEntry {
    pub attribute: String,
    /// `None` declares the attribute as not annotated in this dataset.
    #[serde(default)]
    pub source: Option<String>,
    /// Flip the source polarity (e.g. `No_Beard` for "beard").
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub invert: bool,
    /// Labels that mean "with", for text-valued columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub with_values: Vec<String>,
    /// Labels that mean "without". If empty, every label not in
    /// `with_values` means "without".
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub without_values: Vec<String>,
}

impl AliasEntry {
    fn presence(&self, value: Option<&AttrValue>) -> Result<Presence, String> {
        let raw = match value {
            None => Presence::Unknown,
            Some(AttrValue::Flag(true)) => Presence::With,
            Some(AttrValue::Flag(false)) => Presence::Without,
            Some(AttrValue::Label(label)) => {
                if self.with_values.is_empty() {
                    return Err(format!(
                        "attribute `{}`: label `{label}` needs `with_values` to be interpreted",
                        self.attribute
                    ));
                }
                if self.with_values.contains(label) {
                    Presence::With
                } else if self.without_values.is_empty() || self.without_values.contains(label) {
                    Presence::Without
                } else {
                    Presence::Unknown
                }
            }
        };
        Ok(if self.invert { raw.flipped() } else { raw })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CorrespondenceRef {
    /// `identity` or `ibug68-to-celeba5`.
    Named(String),
    Explicit(CorrespondenceMap),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestName {
    #[default]
    Welch,
    Permutation,
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_iterations() -> u64 {
    10_000
}

/// One dataset's inputs and audit settings. Relative paths resolve against
/// the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub dataset: String,
    pub gt_landmarks: PathBuf,
    pub pred_landmarks: PathBuf,
    pub attributes: Vec<AttributeFile>,
    pub gt_scheme: String,
    pub pred_scheme: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correspondence: Option<CorrespondenceRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationSpec>,
    pub aliases: Vec<AliasEntry>,
    #[serde(default)]
    pub test: TestName,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub bonferroni: bool,
    #[serde(default = "default_iterations")]
    pub permutation_iterations: u64,
    #[serde(default)]
    pub seed: u64,
}

impl DatasetManifest {
    pub fn canonical_attributes(&self) -> Vec<String> {
        self.aliases.iter().map(|a| a.attribute.clone()).collect()
    }

    /// Resolves the prediction-to-ground-truth map, if the schemes differ or
    /// one was given explicitly.
    pub fn correspondence_map(&self) -> Result<Option<CorrespondenceMap>, IngestError> {
        let gt = Scheme::from_id(&self.gt_scheme)?;
        let pred = Scheme::from_id(&self.pred_scheme)?;
        let map = match &self.correspondence {
            None if gt == pred => return Ok(None),
            None => CorrespondenceMap::builtin(&pred, &gt).ok_or_else(|| {
                IngestError::Manifest(format!(
                    "no built-in correspondence from `{}` to `{}`; set `correspondence`",
                    pred.id(),
                    gt.id()
                ))
            })?,
            Some(CorrespondenceRef::Named(name)) => match name.as_str() {
                "identity" => CorrespondenceMap::identity(&pred),
                "ibug68-to-celeba5" => CorrespondenceMap::ibug68_to_celeba5(),
                other => return Err(IngestError::Manifest(format!("unknown correspondence `{other}`"))),
            },
            Some(CorrespondenceRef::Explicit(map)) => map.clone(),
        };
        let (source, target) = map.validate()?;
        if source != pred || target != gt {
            return Err(IngestError::Manifest(format!(
                "correspondence maps `{}` to `{}`, but the manifest declares `{}` to `{}`",
                source.id(),
                target.id(),
                pred.id(),
                gt.id()
            )));
        }
        Ok(Some(map))
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let bad = |m: String| Err(IngestError::Manifest(m));
        if self.dataset.is_empty() {
            return bad("`dataset` must not be empty".into());
        }
        let gt = Scheme::from_id(&self.gt_scheme)?;
        Scheme::from_id(&self.pred_scheme)?;
        self.correspondence_map()?;
        match &self.normalization {
            Some(n) => n.validate(&gt)?,
            None if NormalizationSpec::default_for(&gt).is_none() => {
                return bad(format!("scheme `{}` has no default normalization; set `normalization`", gt.id()))
            }
            None => {}
        }
        if self.aliases.is_empty() {
            return bad("`aliases` must name at least one attribute".into());
        }
        let mut names = HashSet::new();
        let mut sources = HashSet::new();
        for alias in &self.aliases {
            if alias.attribute.is_empty() {
                return bad("alias with empty `attribute`".into());
            }
            if !names.insert(&alias.attribute) {
                return bad(format!("attribute `{}` is aliased twice", alias.attribute));
            }
            if let Some(src) = &alias.source {
                if !sources.insert(src) {
                    return bad(format!("source column `{src}` is mapped by more than one attribute"));
                }
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("`alpha` must lie in (0, 1), got {}", self.alpha));
        }
        if self.permutation_iterations == 0 {
            return bad("`permutation_iterations` must be positive".into());
        }
        Ok(())
    }

    pub fn audit_config(&self) -> Result<AuditConfig, IngestError> {
        Ok(AuditConfig {
            normalization: self.normalization.clone(),
            correspondence: self.correspondence_map()?,
            test: match self.test {
                TestName::Welch => TestChoice::Welch,
                TestName::Permutation => TestChoice::Permutation {
                    iterations: self.permutation_iterations,
                    seed: self.seed,
                    exact_cap: DEFAULT_EXACT_CAP,
                },
            },
            alpha: self.alpha,
            bonferroni: self.bonferroni,
        })
    }
}

/// Reads and validates a manifest, resolving its paths against its directory.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest, IngestError> {
    let text = read(path)?;
    let mut manifest: DatasetManifest = serde_json::from_str(&text).map_err(|e| IngestError::Parse {
        file: path.display().to_string(),
        source: ParseError::at(e.line(), e.column(), e.to_string()),
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let resolve = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    resolve(&mut manifest.gt_landmarks);
    resolve(&mut manifest.pred_landmarks);
    manifest.attributes.iter_mut().for_each(|a| resolve(&mut a.path));
    manifest.validate()?;
    Ok(manifest)
}

fn read(path: &Path) -> Result<String, IngestError> {
    std::fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.display().to_string(), source })
}

/// Join bookkeeping. `joined` always equals the number of ground-truth ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestSummary {
    pub joined: u64,
    /// Ground-truth faces without a prediction (detection failures).
    pub missing_pred: u64,
    /// Ground-truth faces absent from every attribute file.
    pub missing_attr: u64,
    /// Predictions whose id has no ground truth.
    pub orphan_pred: u64,
}

enum Parsed {
    Landmarks(LandmarkTable),
    Attributes(AttributeTable),
}

/// Parses every file in the manifest (concurrently when enabled), then joins
/// on id in ground-truth order.
pub fn build_records(manifest: &DatasetManifest) -> Result<(Vec<FaceRecord>, IngestSummary), IngestError> {
    manifest.validate()?;
    let mut jobs: Vec<(&Path, Option<&str>, Option<AttributeFormat>)> = vec![
        (&manifest.gt_landmarks, Some(&manifest.gt_scheme), None),
        (&manifest.pred_landmarks, Some(&manifest.pred_scheme), None),
    ];
    jobs.extend(manifest.attributes.iter().map(|a| (a.path.as_path(), None, Some(a.format))));

    let results = exec::map_slice(&jobs, |&(path, scheme, format)| -> Result<Parsed, IngestError> {
        let text = read(path)?;
        let parsed = match (scheme, format) {
            (Some(scheme), _) => parse_landmark_csv(&text, scheme).map(Parsed::Landmarks),
            (None, Some(AttributeFormat::CelebaAttr)) => parse_celeba_attributes(&text).map(Parsed::Attributes),
            (None, Some(AttributeFormat::Csv)) => parse_attribute_csv(&text).map(Parsed::Attributes),
            (None, Some(AttributeFormat::JsonLines)) => parse_attribute_jsonl(&text).map(Parsed::Attributes),
            (None, None) => unreachable!("every job has a scheme or a format"),
        };
        parsed.map_err(|source| IngestError::Parse { file: path.display().to_string(), source })
    });

    let mut errors = Vec::new();
    let mut parsed = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(p) => parsed.push(p),
            Err(e) => errors.push(e),
        }
    }
    match errors.len() {
        0 => {}
        1 => return Err(errors.remove(0)),
        _ => return Err(IngestError::Files(errors)),
    }

    let mut parsed = parsed.into_iter();
    let (Some(Parsed::Landmarks(gt)), Some(Parsed::Landmarks(mut pred))) = (parsed.next(), parsed.next()) else {
        unreachable!("landmark jobs come first");
    };
    let tables: Vec<AttributeTable> = parsed
        .map(|p| match p {
            Parsed::Attributes(t) => t,
            Parsed::Landmarks(_) => unreachable!(),
        })
        .collect();
    if gt.is_empty() {
        return Err(IngestError::EmptyGroundTruth(manifest.gt_landmarks.display().to_string()));
    }

    // column name -> (table, column index)
    let mut columns: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (t, table) in tables.iter().enumerate() {
        for (c, name) in table.columns.iter().enumerate() {
            if columns.insert(name, (t, c)).is_some() {
                return Err(IngestError::Manifest(format!(
                    "attribute column `{name}` appears in more than one attribute file"
                )));
            }
        }
    }
    // JSON-lines files have no header: a column with no value in any row is
    // simply never seen, so it reads as all-unknown instead of an error.
    let headerless = manifest.attributes.iter().any(|a| a.format == AttributeFormat::JsonLines);
    let resolved: Vec<(&AliasEntry, Option<(usize, usize)>)> = manifest
        .aliases
        .iter()
        .map(|alias| match &alias.source {
            None => Ok((alias, None)),
            Some(src) if headerless && !columns.contains_key(src.as_str()) => Ok((alias, None)),
            Some(src) => columns
                .get(src.as_str())
                .map(|&loc| (alias, Some(loc)))
                .ok_or_else(|| {
                    IngestError::Manifest(format!(
                        "attribute `{}` maps to column `{src}`, which no attribute file provides",
                        alias.attribute
                    ))
                }),
        })
        .collect::<Result<_, _>>()?;

    let mut summary = IngestSummary { joined: gt.len() as u64, ..IngestSummary::default() };
    let mut records = Vec::with_capacity(gt.len());
    for (id, gt_set) in gt {
        let pred_set = pred.shift_remove(&id);
        summary.missing_pred += u64::from(pred_set.is_none());
        summary.missing_attr += u64::from(!tables.iter().any(|t| t.rows.contains_key(&id)));
        let mut attributes = BTreeMap::new();
        for (alias, loc) in &resolved {
            let value = loc.and_then(|(t, c)| tables[t].get(&id, c));
            let presence = alias
                .presence(value)
                .map_err(|m| IngestError::Manifest(format!("record `{id}`: {m}")))?;
            attributes.insert(alias.attribute.clone(), presence);
        }
        records.push(FaceRecord {
            id,
            dataset: manifest.dataset.clone(),
            gt: gt_set,
            pred: pred_set,
            attributes,
        });
    }
    summary.orphan_pred = pred.len() as u64;
    Ok((records, summary))
}
