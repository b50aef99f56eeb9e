//! Closed-form truths of the simulation models.
//!
//! All three models draw `L ~ N(0, I_4)` (the modifier model dichotomises the
//! fourth coordinate), `(A / R) | L ~ Beta(λ(L), 1 - λ(L))` with a
//! logit-linear `λ`, and an outcome whose conditional mean is polynomial in
//! `A` up to a Gaussian bump at 2.5. The bump uses the negative exponent
//! `exp{-(A - 2.5)^2 / (1/2)^2}`.

use serde::{Deserialize, Serialize};

use crate::kernel::adaptive_simpson;
use crate::nuisance::basis::bump;
use crate::nuisance::{Link, OutcomeSection};

/// Sign convention of the bump exponent, echoed in generator metadata.
pub const BUMP_EXPONENT_SIGN: &str = "negative";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimModel {
    /// Binary outcome, treatment on `(0, 20)`.
    Model1,
    /// Continuous outcome, treatment on `(0, 5)`.
    Model2,
    /// Model 2 variant with a binary effect modifier `L4 = 1{L̃4 > 1}`.
    Modifier,
}

impl std::str::FromStr for SimModel {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "model1" => Ok(Self::Model1),
            "model2" => Ok(Self::Model2),
            "modifier" => Ok(Self::Modifier),
            other => Err(crate::Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

impl std::fmt::Display for SimModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Model1 => "model1",
            Self::Model2 => "model2",
            Self::Modifier => "modifier",
        })
    }
}

impl SimModel {
    /// Upper end `R` of the treatment support `(0, R)`.
    pub fn scale(&self) -> f64 {
        match self {
            Self::Model1 => 20.0,
            Self::Model2 | Self::Modifier => 5.0,
        }
    }

    /// Studied values of the effect-size parameter.
    pub fn studied_deltas(&self) -> &'static [f64] {
        match self {
            Self::Model1 => &[0.0, 0.002, 0.004, 0.006, 0.008, 0.01],
            Self::Model2 | Self::Modifier => &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
        }
    }

    pub fn logit_lambda(&self, l: &[f64]) -> f64 {
        let lin = 0.1 * l[0] + 0.1 * l[1] - 0.1 * l[2] + 0.2 * l[3];
        match self {
            Self::Model1 => -0.8 + lin,
            Self::Model2 | Self::Modifier => lin,
        }
    }

    pub fn lambda(&self, l: &[f64]) -> f64 {
        logistic(self.logit_lambda(l))
    }

    /// True outcome regression `μ0(l, ·)` at a fixed covariate row.
    pub fn outcome_section(&self, delta: f64, l: &[f64]) -> OutcomeSection {
        match self {
            Self::Model1 => OutcomeSection {
                poly: [
                    1.0 + 0.2 * l[0] + 0.2 * l[1] + 0.3 * l[2] - 0.1 * l[3],
                    delta * (0.1 - 0.1 * l[0] + 0.1 * l[2]),
                    0.0,
                    -delta * 0.13 * 0.13,
                ],
                bump: 0.0,
                link: Link::Logit,
            },
            Self::Model2 => OutcomeSection {
                poly: [
                    0.2 * l[0] + 0.2 * l[1] + 0.3 * l[2] - 0.1 * l[3],
                    -0.1 * l[0] + 0.1 * l[2],
                    0.0,
                    0.0,
                ],
                bump: delta,
                link: Link::Identity,
            },
            Self::Modifier => OutcomeSection {
                poly: [
                    0.2 * l[0] + 0.2 * l[1] + 0.3 * l[2] - 0.1 * delta * l[3],
                    -0.1 * l[0] + 0.1 * delta * l[3],
                    0.0,
                    0.0,
                ],
                bump: 1.0,
                link: Link::Identity,
            },
        }
    }

    /// Marginal effect curve `θ0(a) = E[μ0(L, a)]`.
    pub fn effect_curve(&self, delta: f64, a: f64) -> f64 {
        match self {
            Self::Model1 => {
                // logit μ is a + b'L with L ~ N(0, I), so it is N(m, v).
                let m = 1.0 + delta * (0.1 * a - 0.13 * 0.13 * a.powi(3));
                let coef = [0.2 - 0.1 * delta * a, 0.2, 0.3 + 0.1 * delta * a, -0.1];
                let sd = coef.iter().map(|c| c * c).sum::<f64>().sqrt();
                let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
                adaptive_simpson(&|z| logistic(m + sd * z) * phi(z), -12.0, 12.0, 1e-12)
            }
            Self::Model2 => delta * bump(a),
            Self::Modifier => {
                let p = modifier_share();
                bump(a) + 0.1 * delta * p * (a - 1.0)
            }
        }
    }

    /// `E[Y^a | L4 = group]` for the modifier model.
    pub fn group_effect_curve(&self, delta: f64, group: usize, a: f64) -> Option<f64> {
        match self {
            Self::Modifier => {
                let g = group as f64;
                Some(bump(a) - 0.1 * delta * g + 0.1 * delta * a * g)
            }
            _ => None,
        }
    }
}

/// `P(L̃4 > 1) = Φ(-1)`.
pub fn modifier_share() -> f64 {
    0.158_655_253_931_457_05
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
