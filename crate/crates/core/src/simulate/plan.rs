use serde::{Deserialize, Serialize};

use super::SimError;
use crate::stats::{required_sample_size, PowerSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributePlan {
    pub attribute: String,
    pub spec: PowerSpec,
    pub per_stratum: u64,
}

/// Per-attribute stratum sizes and the overall synthetic set size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionPlan {
    pub attributes: Vec<AttributePlan>,
    /// Every face carries every attribute, so the set only needs to be as
    /// large as the most demanding attribute's two strata.
    pub total: u64,
}

pub fn plan_composition(specs: &[(String, PowerSpec)]) -> Result<CompositionPlan, SimError> {
    let attributes = specs
        .iter()
        .map(|(attribute, spec)| {
            let per_stratum = required_sample_size(spec)
                .map_err(|source| SimError::Power { attribute: attribute.clone(), source })?;
            Ok(AttributePlan { attribute: attribute.clone(), spec: *spec, per_stratum })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let total = attributes.iter().map(|a| 2 * a.per_stratum).max().unwrap_or(0);
    Ok(CompositionPlan { attributes, total })
}
