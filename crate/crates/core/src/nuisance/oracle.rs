use serde::{Deserialize, Serialize};

use super::{NuisanceModel, OutcomeModel, PropensityModel, Provenance};
use crate::simlab::models::{SimModel, BUMP_EXPONENT_SIGN};

/// Generator truth used as a nuisance evaluator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub model: SimModel,
    pub delta: f64,
    pub bump_exponent: String,
}

impl OracleSpec {
    pub fn new(model: SimModel, delta: f64) -> Self {
        Self {
            model,
            delta,
            bump_exponent: BUMP_EXPONENT_SIGN.into(),
        }
    }
}

/// Both nuisances set to the closed-form truth of `model`, with the default
/// 0.01 positivity floor.
pub fn oracle_nuisance(model: SimModel, delta: f64) -> NuisanceModel {
    let spec = OracleSpec::new(model, delta);
    NuisanceModel {
        propensity: PropensityModel::Oracle(spec.clone()),
        outcome: OutcomeModel::Oracle(spec),
        trunc_floor: 0.01,
        provenance: Provenance::Oracle,
    }
}
