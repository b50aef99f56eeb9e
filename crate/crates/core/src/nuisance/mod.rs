//! Nuisance functions: the propensity density `π(a | l)` and the outcome
//! regression `μ(l, a)`.
//!
//! Every model in this crate is a Beta density in the rescaled dose for the
//! propensity and a (possibly logit-linked) polynomial-plus-bump in the dose
//! for the outcome, once the covariate row is fixed. Pseudo-outcome
//! computation exploits this by reducing each row to a [`BetaSection`] and an
//! [`OutcomeSection`] before the `n x n` evaluation.

pub mod basis;
mod beta;
mod oracle;
mod outcome;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::simlab::models::logistic;

pub use basis::{CovariateTransform, OutcomeBasis, PropensityBasis};
pub use beta::{fit_beta_propensity, BetaFitOptions, BetaPropensityFit};
pub use oracle::{oracle_nuisance, OracleSpec};
pub use outcome::{fit_linear_outcome, fit_logistic_outcome, OutcomeFit};

/// Probabilities from a logit link are kept in this band.
pub const PROB_CLIP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Logit,
}

/// Outcome regression at one covariate row, as a function of dose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeSection {
    /// Coefficients of `1, a, a^2, a^3` on the link scale.
    pub poly: [f64; 4],
    /// Coefficient of [`basis::bump`].
    pub bump: f64,
    pub link: Link,
}

impl OutcomeSection {
    #[inline]
    pub fn eval(&self, a: f64) -> f64 {
        let p = &self.poly;
        let mut eta = p[0] + a * (p[1] + a * (p[2] + a * p[3]));
        if self.bump != 0.0 {
            eta += self.bump * basis::bump(a);
        }
        match self.link {
            Link::Identity => eta,
            Link::Logit => logistic(eta).clamp(PROB_CLIP, 1.0 - PROB_CLIP),
        }
    }
}

/// Dose-dependent pieces of the Beta density, shared by every section of the
/// same model.
#[derive(Debug, Clone, Copy)]
pub struct DosePoint {
    inv_x: f64,
    log_odds: f64,
    inside: bool,
}

/// `π(· | l) = Beta(λ, 1 - λ)` density of `(a - offset) / scale`, per dose unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSection {
    pub lambda: f64,
    pub offset: f64,
    pub scale: f64,
    norm: f64,
}

impl BetaSection {
    pub fn new(lambda: f64, offset: f64, scale: f64) -> Self {
        // B(λ, 1 - λ) = Γ(λ)Γ(1 - λ) = π / sin(πλ).
        let norm = (std::f64::consts::PI * lambda).sin() / (std::f64::consts::PI * scale);
        Self {
            lambda,
            offset,
            scale,
            norm,
        }
    }

    pub fn dose_point(offset: f64, scale: f64, a: f64) -> DosePoint {
        let x = (a - offset) / scale;
        if x > 0.0 && x < 1.0 {
            DosePoint {
                inv_x: 1.0 / x,
                log_odds: x.ln() - (-x).ln_1p(),
                inside: true,
            }
        } else {
            DosePoint {
                inv_x: 0.0,
                log_odds: 0.0,
                inside: false,
            }
        }
    }

    #[inline]
    pub fn density_at(&self, p: &DosePoint) -> f64 {
        if p.inside {
            self.norm * p.inv_x * (self.lambda * p.log_odds).exp()
        } else {
            0.0
        }
    }

    pub fn density(&self, a: f64) -> f64 {
        self.density_at(&Self::dose_point(self.offset, self.scale, a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PropensityModel {
    Beta(BetaPropensityFit),
    Oracle(OracleSpec),
}

impl PropensityModel {
    pub fn section(&self, l: &[f64]) -> Result<BetaSection> {
        match self {
            Self::Beta(fit) => fit.section(l),
            Self::Oracle(spec) => {
                let m = spec.model;
                Ok(BetaSection::new(m.lambda(l), 0.0, m.scale()))
            }
        }
    }

    /// `(offset, scale)` of the dose support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Beta(fit) => (fit.offset, fit.scale),
            Self::Oracle(spec) => (0.0, spec.model.scale()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OutcomeModel {
    Fitted(OutcomeFit),
    Oracle(OracleSpec),
}

impl OutcomeModel {
    pub fn section(&self, l: &[f64]) -> Result<OutcomeSection> {
        match self {
            Self::Fitted(fit) => fit.section(l),
            Self::Oracle(spec) => Ok(spec.model.outcome_section(spec.delta, l)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Fitted,
    Oracle,
    Misspecified,
}

/// Paired propensity and outcome evaluators with the positivity floor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceModel {
    pub propensity: PropensityModel,
    pub outcome: OutcomeModel,
    pub trunc_floor: f64,
    pub provenance: Provenance,
}

impl NuisanceModel {
    pub fn new(
        propensity: PropensityModel,
        outcome: OutcomeModel,
        trunc_floor: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if !(0.0..0.5).contains(&trunc_floor) {
            return Err(Error::InvalidConfig(format!(
                "trunc_floor must lie in [0, 0.5), got {trunc_floor}"
            )));
        }
        Ok(Self {
            propensity,
            outcome,
            trunc_floor,
            provenance,
        })
    }

    pub fn with_trunc_floor(mut self, floor: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&floor) {
            return Err(Error::InvalidConfig(format!(
                "trunc_floor must lie in [0, 0.5), got {floor}"
            )));
        }
        self.trunc_floor = floor;
        Ok(self)
    }

    pub fn propensity(&self, a: f64, l: &[f64]) -> Result<f64> {
        Ok(self.propensity.section(l)?.density(a))
    }

    /// `max(π(a | l), trunc_floor)`.
    pub fn propensity_truncated(&self, a: f64, l: &[f64]) -> Result<f64> {
        Ok(self.propensity(a, l)?.max(self.trunc_floor))
    }

    pub fn outcome(&self, l: &[f64], a: f64) -> Result<f64> {
        Ok(self.outcome.section(l)?.eval(a))
    }

    /// Per-row sections for the whole dataset.
    pub fn sections(&self, ds: &Dataset) -> Result<(Vec<BetaSection>, Vec<OutcomeSection>)> {
        let mut props = Vec::with_capacity(ds.len());
        let mut outs = Vec::with_capacity(ds.len());
        for i in 0..ds.len() {
            let l = ds.covariate_row(i);
            props.push(self.propensity.section(l)?);
            outs.push(self.outcome.section(l)?);
        }
        Ok((props, outs))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let nm: Self = serde_json::from_str(text)?;
        Self::new(nm.propensity, nm.outcome, nm.trunc_floor, nm.provenance)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}
