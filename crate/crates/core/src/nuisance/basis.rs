//! Covariate transforms and the regression bases used by the nuisance fits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Applied to the covariate row before any basis expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateTransform {
    Identity,
    /// Nonlinear distortion of four covariates used to feed a wrong design
    /// to one nuisance model.
    KangSchafer,
}

impl CovariateTransform {
    pub fn apply(&self, l: &[f64]) -> Result<Vec<f64>> {
        match self {
            Self::Identity => Ok(l.to_vec()),
            Self::KangSchafer => {
                let arr: &[f64; 4] = l.try_into().map_err(|_| {
                    Error::InvalidData(format!(
                        "Kang-Schafer transform needs 4 covariates, got {}",
                        l.len()
                    ))
                })?;
                Ok(kang_schafer_row(arr).to_vec())
            }
        }
    }
}

pub fn kang_schafer_row(l: &[f64; 4]) -> [f64; 4] {
    [
        (l[0] / 2.0).exp(),
        l[1] / (1.0 + l[0].exp()) + 10.0,
        (l[0] * l[2] / 25.0 + 0.6).powi(3),
        (l[1] + l[3] + 20.0).powi(2),
    ]
}

/// Column-wise Kang-Schafer transform of a row-major `n x 4` matrix.
pub fn kang_schafer_transform(l: &[f64], d: usize) -> Result<Vec<f64>> {
    if d != 4 {
        return Err(Error::InvalidData(format!(
            "Kang-Schafer transform needs d = 4, got {d}"
        )));
    }
    Ok(l.chunks_exact(4)
        .flat_map(|row| kang_schafer_row(row.try_into().expect("chunk of 4")))
        .collect())
}

/// Dose term multiplying a covariate feature in an outcome design column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoseTerm {
    /// `a^k`, `k` in `0..=3`.
    Power(u8),
    /// `exp{-(a - 2.5)^2 / 0.25}`.
    Bump,
}

pub const BUMP_CENTER: f64 = 2.5;
pub const BUMP_WIDTH: f64 = 0.5;

#[inline]
pub fn bump(a: f64) -> f64 {
    let z = (a - BUMP_CENTER) / BUMP_WIDTH;
    (-z * z).exp()
}

impl DoseTerm {
    #[inline]
    pub fn eval(self, a: f64) -> f64 {
        match self {
            Self::Power(k) => a.powi(k as i32),
            Self::Bump => bump(a),
        }
    }
}

/// Outcome regression design in `(L, A)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeBasis {
    /// `1, L, A, L·A`.
    Linear,
    /// `Linear` plus the Gaussian bump in `A` centred at 2.5.
    LinearBump,
    /// `Linear` plus `A^2, A^3`.
    Cubic,
    /// `1, L, L^2, L^3, A, A^2, A^3, L·A`.
    Flexible,
}

impl OutcomeBasis {
    /// Design columns as `(covariate feature, dose term)` pairs.
    pub fn terms(&self, l: &[f64]) -> Vec<(f64, DoseTerm)> {
        use DoseTerm::*;
        let mut t = vec![(1.0, Power(0))];
        t.extend(l.iter().map(|&v| (v, Power(0))));
        if *self == Self::Flexible {
            t.extend(l.iter().map(|&v| (v * v, Power(0))));
            t.extend(l.iter().map(|&v| (v * v * v, Power(0))));
        }
        t.push((1.0, Power(1)));
        t.extend(l.iter().map(|&v| (v, Power(1))));
        match self {
            Self::Linear => {}
            Self::LinearBump => t.push((1.0, Bump)),
            Self::Cubic | Self::Flexible => {
                t.push((1.0, Power(2)));
                t.push((1.0, Power(3)));
            }
        }
        t
    }

    pub fn width(&self, d: usize) -> usize {
        match self {
            Self::Linear => 2 + 2 * d,
            Self::LinearBump => 3 + 2 * d,
            Self::Cubic => 4 + 2 * d,
            Self::Flexible => 4 + 4 * d,
        }
    }
}

/// Covariate design for the logit of the Beta mean `λ(L)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropensityBasis {
    /// Constant `λ`.
    Intercept,
    /// `1, L`.
    Linear,
    /// `1, L, L^2, L^3`.
    Flexible,
}

impl PropensityBasis {
    pub fn features(&self, l: &[f64]) -> Vec<f64> {
        let mut f = vec![1.0];
        match self {
            Self::Intercept => {}
            Self::Linear => f.extend_from_slice(l),
            Self::Flexible => {
                f.extend_from_slice(l);
                f.extend(l.iter().map(|v| v * v));
                f.extend(l.iter().map(|v| v * v * v));
            }
        }
        f
    }

    pub fn width(&self, d: usize) -> usize {
        match self {
            Self::Intercept => 1,
            Self::Linear => 1 + d,
            Self::Flexible => 1 + 3 * d,
        }
    }
}
