//! Landmark, attribute and manifest files, and the join into
//! [`FaceRecord`](crate::audit::FaceRecord)s.
//!
//! # Landmark CSV
//!
//! UTF-8 with LF line endings (a CR anywhere is rejected). The header is
//! exactly `id,x0,y0,...,x{N-1},y{N-1}` for an `N`-point scheme, with no
//! trailing delimiter. Each row is a non-empty id followed by `2N`
//! coordinates. A coordinate matches
//!
//! ```text
//! [+-]? DIGIT+ ( "." DIGIT+ )? ( [eE] [+-]? DIGIT+ )?
//! ```
//!
//! with `.` as the only decimal separator. A final newline is optional;
//! blank lines elsewhere are errors. Faces the detector missed are simply
//! absent from the prediction file.
//!
//! # Attribute files
//!
//! * `celeba-attr`: line 1 is the record count, line 2 the
//!   whitespace-separated attribute names, then one line per image with the
//!   id and one `1` / `-1` per attribute.
//! * `csv`: header `id,<name>,...`; cells are `1`, `-1`, empty (unknown) or
//!   a free-text label.
//! * `json-lines`: one object per line with a string `"id"`. Booleans and
//!   `1` / `-1` are flags, strings and other numbers are labels, `null` or a
//!   missing key is unknown. With no header, a column that never appears
//!   reads as unknown for every record.

mod attributes;
mod landmarks;
mod manifest;

use thiserror::Error;

use crate::metrics::MetricError;

pub use attributes::{
    parse_attribute_csv, parse_attribute_jsonl, parse_celeba_attributes, write_attribute_csv,
    write_attribute_jsonl, write_celeba_attributes, AttrValue, AttributeTable,
};
pub use landmarks::{parse_landmark_csv, write_landmark_csv, LandmarkTable};
pub use manifest::{
    build_records, load_manifest, AliasEntry, AttributeFile, AttributeFormat, CorrespondenceRef, DatasetManifest,
    IngestSummary, TestName,
};

/// A content-level parse failure. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
pub struct ParseError {
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(line: usize, message: impl Into<String>) -> Self {
        Self { line, column: None, message: message.into() }
    }

    pub(crate) fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self { line, column: Some(column), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{file}: {source}")]
    Parse { file: String, source: ParseError },
    #[error("{}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Files(Vec<IngestError>),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("manifest: {0}")]
    Metric(#[from] MetricError),
    #[error("{0}: ground-truth file has no records")]
    EmptyGroundTruth(String),
}

impl IngestError {
    /// True when the failure came from the file system rather than content.
    pub fn is_io(&self) -> bool {
        match self {
            Self::Io { .. } => true,
            Self::Files(errs) => errs.iter().any(Self::is_io),
            _ => false,
        }
    }
}

/// Splits text into numbered LF-terminated lines, rejecting CR.
pub(crate) fn lf_lines(content: &str) -> Result<Vec<(usize, &str)>, ParseError> {
    if let Some(pos) = content.find('\r') {
        let line = content[..pos].matches('\n').count() + 1;
        return Err(ParseError::new(line, "carriage return found; files must use LF line endings"));
    }
    let body = content.strip_suffix('\n').unwrap_or(content);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    Ok(body.split('\n').enumerate().map(|(i, l)| (i + 1, l)).collect())
}
