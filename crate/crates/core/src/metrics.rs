//! Landmark geometry and Normalized Mean Error.
//!
//! NME is kept as a dimensionless fraction everywhere in the library; the
//! report layer is the only place that multiplies by 100.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalizers below this many pixels are treated as degenerate geometry.
pub const DEFAULT_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("unknown landmark scheme `{0}`")]
    UnknownScheme(String),
    #[error("scheme mismatch: expected `{expected}`, found `{found}`")]
    SchemeMismatch { expected: String, found: String },
    #[error("scheme `{scheme}` has {expected} points, got {found}")]
    PointCount {
        scheme: String,
        expected: usize,
        found: usize,
    },
    #[error("point index {index} out of range for scheme `{scheme}` ({len} points)")]
    InvalidIndex {
        scheme: String,
        index: usize,
        len: usize,
    },
    #[error("target point {0} has no source indices")]
    EmptyTarget(usize),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("degenerate geometry: normalizer {value} px is below {epsilon} px")]
    Degenerate { value: f64, epsilon: f64 },
    #[error("fixed normalizer must be positive and finite, got {0}")]
    InvalidConstant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A named landmark layout with a fixed point count.
///
/// Known ids are `ibug68`, `celeba5`, `eyes2`, and the generic `points:N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scheme {
    id: String,
    num_points: usize,
}

impl Scheme {
    pub const IBUG68: &'static str = "ibug68";
    pub const CELEBA5: &'static str = "celeba5";
    pub const EYES2: &'static str = "eyes2";

    pub fn from_id(id: &str) -> Result<Self, MetricError> {
        let num_points = match id {
            Self::IBUG68 => 68,
            Self::CELEBA5 => 5,
            Self::EYES2 => 2,
            other => other
                .strip_prefix("points:")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n > 0)
                .ok_or_else(|| MetricError::UnknownScheme(other.to_string()))?,
        };
        Ok(Self {
            id: id.to_string(),
            num_points,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    fn check_index(&self, index: usize) -> Result<(), MetricError> {
        if index < self.num_points {
            Ok(())
        } else {
            Err(MetricError::InvalidIndex {
                scheme: self.id.clone(),
                index,
                len: self.num_points,
            })
        }
    }
}

/// Ordered 2D landmarks under a scheme. Construction validates the point
/// count and that every coordinate is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkSet {
    scheme: Scheme,
    points: Vec<Point2D>,
}

impl LandmarkSet {
    pub fn new(scheme: &str, points: Vec<Point2D>) -> Result<Self, MetricError> {
        Self::with_scheme(Scheme::from_id(scheme)?, points)
    }

    pub fn with_scheme(scheme: Scheme, points: Vec<Point2D>) -> Result<Self, MetricError> {
        if points.len() != scheme.num_points {
            return Err(MetricError::PointCount {
                scheme: scheme.id,
                expected: scheme.num_points,
                found: points.len(),
            });
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(MetricError::NonFinite(i));
        }
        Ok(Self { scheme, points })
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    fn centroid(&self, indices: &[usize]) -> Point2D {
        let n = indices.len() as f64;
        let (sx, sy) = indices.iter().fold((0.0, 0.0), |(sx, sy), &i| {
            (sx + self.points[i].x, sy + self.points[i].y)
        });
        Point2D::new(sx / n, sy / n)
    }
}

/// Face-scale normalizer used as the NME denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NormalizationSpec {
    /// Distance between two eye centers, each the mean of its index set.
    InterOcular { left: Vec<usize>, right: Vec<usize> },
    /// Diagonal of the axis-aligned box around all ground-truth points.
    BoundingBoxDiagonal,
    /// A constant in pixels.
    FixedConstant { value: f64 },
}

impl NormalizationSpec {
    /// Inter-ocular normalization with the conventional eye indices of a
    /// known scheme.
    pub fn default_for(scheme: &Scheme) -> Option<Self> {
        let (left, right) = match scheme.id() {
            Scheme::IBUG68 => ((36..=41).collect(), (42..=47).collect()),
            Scheme::CELEBA5 | Scheme::EYES2 => (vec![0], vec![1]),
            _ => return None,
        };
        Some(Self::InterOcular { left, right })
    }

    pub fn validate(&self, scheme: &Scheme) -> Result<(), MetricError> {
        match self {
            Self::InterOcular { left, right } => {
                for (slot, set) in [(0, left), (1, right)] {
                    if set.is_empty() {
                        return Err(MetricError::EmptyTarget(slot));
                    }
                    set.iter().try_for_each(|&i| scheme.check_index(i))?;
                }
                Ok(())
            }
            Self::BoundingBoxDiagonal => Ok(()),
            Self::FixedConstant { value } => {
                if value.is_finite() && *value > 0.0 {
                    Ok(())
                } else {
                    Err(MetricError::InvalidConstant(*value))
                }
            }
        }
    }
}

/// Converts landmarks between schemes; each target point is the mean of its
/// source indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceMap {
    pub source: String,
    pub target: String,
    pub points: Vec<Vec<usize>>,
}

impl CorrespondenceMap {
    pub fn identity(scheme: &Scheme) -> Self {
        Self {
            source: scheme.id().to_string(),
            target: scheme.id().to_string(),
            points: (0..scheme.num_points()).map(|i| vec![i]).collect(),
        }
    }

    /// iBUG 68 to the CelebA 5-point layout: eye centers from the six
    /// contour points of each eye, nose tip 30, mouth corners 48 and 54.
    pub fn ibug68_to_celeba5() -> Self {
        Self {
            source: Scheme::IBUG68.to_string(),
            target: Scheme::CELEBA5.to_string(),
            points: vec![
                (36..=41).collect(),
                (42..=47).collect(),
                vec![30],
                vec![48],
                vec![54],
            ],
        }
    }

    /// Resolves the built-in map between two schemes, if there is one.
    pub fn builtin(source: &Scheme, target: &Scheme) -> Option<Self> {
        if source == target {
            Some(Self::identity(source))
        } else if source.id() == Scheme::IBUG68 && target.id() == Scheme::CELEBA5 {
            Some(Self::ibug68_to_celeba5())
        } else {
            None
        }
    }

    /// Checks the map against its declared schemes and returns them.
    pub fn validate(&self) -> Result<(Scheme, Scheme), MetricError> {
        let source = Scheme::from_id(&self.source)?;
        let target = Scheme::from_id(&self.target)?;
        if self.points.len() != target.num_points() {
            return Err(MetricError::PointCount {
                scheme: target.id,
                expected: target.num_points,
                found: self.points.len(),
            });
        }
        for (t, sources) in self.points.iter().enumerate() {
            if sources.is_empty() {
                return Err(MetricError::EmptyTarget(t));
            }
            sources.iter().try_for_each(|&i| source.check_index(i))?;
        }
        Ok((source, target))
    }
}

pub fn map_landmarks(src: &LandmarkSet, map: &CorrespondenceMap) -> Result<LandmarkSet, MetricError> {
    if src.scheme.id() != map.source {
        return Err(MetricError::SchemeMismatch {
            expected: map.source.clone(),
            found: src.scheme.id().to_string(),
        });
    }
    let (_, target) = map.validate()?;
    let points = map.points.iter().map(|ix| src.centroid(ix)).collect();
    LandmarkSet::with_scheme(target, points)
}

pub fn normalizer(gt: &LandmarkSet, spec: &NormalizationSpec) -> Result<f64, MetricError> {
    normalizer_with_epsilon(gt, spec, DEFAULT_EPSILON)
}

pub fn normalizer_with_epsilon(
    gt: &LandmarkSet,
    spec: &NormalizationSpec,
    epsilon: f64,
) -> Result<f64, MetricError> {
    spec.validate(&gt.scheme)?;
    let value = match spec {
        NormalizationSpec::InterOcular { left, right } => {
            gt.centroid(left).distance(&gt.centroid(right))
        }
        NormalizationSpec::BoundingBoxDiagonal => {
            let (mut lo, mut hi) = (gt.points[0], gt.points[0]);
            for p in &gt.points[1..] {
                lo.x = lo.x.min(p.x);
                lo.y = lo.y.min(p.y);
                hi.x = hi.x.max(p.x);
                hi.y = hi.y.max(p.y);
            }
            lo.distance(&hi)
        }
        NormalizationSpec::FixedConstant { value } => *value,
    };
    if !value.is_finite() || value < epsilon {
        return Err(MetricError::Degenerate { value, epsilon });
    }
    Ok(value)
}

/// Mean point-to-point Euclidean error divided by the normalizer of `gt`.
pub fn compute_nme(
    pred: &LandmarkSet,
    gt: &LandmarkSet,
    spec: &NormalizationSpec,
) -> Result<f64, MetricError> {
    if pred.scheme != gt.scheme {
        return Err(MetricError::SchemeMismatch {
            expected: gt.scheme.id().to_string(),
            found: pred.scheme.id().to_string(),
        });
    }
    let d = normalizer(gt, spec)?;
    let total: f64 = pred
        .points
        .iter()
        .zip(&gt.points)
        .map(|(p, g)| p.distance(g) / d)
        .sum();
    Ok(total / gt.points.len() as f64)
}
