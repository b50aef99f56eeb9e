//! Doubly robust pseudo-outcomes.
//!
//! For row `i` the marginal pseudo-outcome is
//!
//! ```text
//! ξ_i = (Y_i - μ(L_i, A_i)) / max(π(A_i | L_i), floor) * mean_j π(A_i | L_j)
//!       + mean_j μ(L_j, A_i)
//! ```
//!
//! with the empirical means running over every row `j` (including `i`). The
//! conditional version `φ_i` restricts both means to rows in the same group
//! as `i`. Only the denominator is truncated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nuisance::{BetaSection, Link, NuisanceModel, OutcomeSection};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PseudoKind {
    Marginal,
    Conditional,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoOutcomes {
    pub values: Vec<f64>,
    pub kind: PseudoKind,
    pub group: Option<Vec<usize>>,
}

impl PseudoOutcomes {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sum over a set of rows of the outcome sections, collapsed into a single
/// section when every link is the identity.
enum OutcomeSum<'a> {
    Collapsed(OutcomeSection),
    Rows(Vec<&'a OutcomeSection>),
}

impl<'a> OutcomeSum<'a> {
    fn new(rows: Vec<&'a OutcomeSection>) -> Self {
        if rows.iter().all(|s| s.link == Link::Identity) {
            let mut acc = OutcomeSection {
                poly: [0.0; 4],
                bump: 0.0,
                link: Link::Identity,
            };
            for s in rows {
                for k in 0..4 {
                    acc.poly[k] += s.poly[k];
                }
                acc.bump += s.bump;
            }
            Self::Collapsed(acc)
        } else {
            Self::Rows(rows)
        }
    }

    fn eval(&self, a: f64) -> f64 {
        match self {
            Self::Collapsed(s) => s.eval(a),
            Self::Rows(rows) => rows.iter().map(|s| s.eval(a)).sum(),
        }
    }
}

fn compute(ds: &Dataset, nm: &NuisanceModel, groups: Option<&[usize]>) -> Result<Vec<f64>> {
    let n = ds.len();
    let (props, outs) = nm.sections(ds)?;
    let (offset, scale) = nm.propensity.support();

    // Row membership for the empirical measure of each group.
    let k = groups.map_or(1, |g| g.iter().max().map_or(0, |m| m + 1));
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
    for i in 0..n {
        members[groups.map_or(0, |g| g[i])].push(i);
    }
    if groups.is_some() {
        if let Some((code, m)) = members.iter().enumerate().find(|(_, m)| m.len() < 2) {
            return Err(Error::InvalidData(format!(
                "group {code} has {} member(s); the conditional measure needs at least 2",
                m.len()
            )));
        }
    }
    let prop_rows: Vec<Vec<&BetaSection>> = members
        .iter()
        .map(|m| m.iter().map(|&j| &props[j]).collect())
        .collect();
    let out_sums: Vec<OutcomeSum> = members
        .iter()
        .map(|m| OutcomeSum::new(m.iter().map(|&j| &outs[j]).collect()))
        .collect();

    let a = ds.treatment();
    let y = ds.outcome();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let g = groups.map_or(0, |gr| gr[i]);
            let size = members[g].len() as f64;
            let dp = BetaSection::dose_point(offset, scale, a[i]);
            let mut pi_sum = 0.0;
            for s in &prop_rows[g] {
                pi_sum += s.density_at(&dp);
            }
            let mu_sum = out_sums[g].eval(a[i]);
            let own_pi = props[i].density_at(&dp).max(nm.trunc_floor);
            let own_mu = outs[i].eval(a[i]);
            if !(own_pi > 0.0) || !pi_sum.is_finite() {
                return Err(Error::NonFinite {
                    row: i + 1,
                    source_name: "propensity model",
                });
            }
            if !own_mu.is_finite() || !mu_sum.is_finite() {
                return Err(Error::NonFinite {
                    row: i + 1,
                    source_name: "outcome model",
                });
            }
            let xi = (y[i] - own_mu) / own_pi * (pi_sum / size) + mu_sum / size;
            if xi.is_finite() {
                Ok(xi)
            } else {
                Err(Error::NonFinite {
                    row: i + 1,
                    source_name: "propensity model",
                })
            }
        })
        .collect()
}

/// Marginal pseudo-outcomes `ξ`.
pub fn compute_xi(ds: &Dataset, nm: &NuisanceModel) -> Result<PseudoOutcomes> {
    Ok(PseudoOutcomes {
        values: compute(ds, nm, None)?,
        kind: PseudoKind::Marginal,
        group: ds.group().map(<[usize]>::to_vec),
    })
}

/// Conditional pseudo-outcomes `φ` using the within-group empirical measure.
pub fn compute_phi(ds: &Dataset, nm: &NuisanceModel) -> Result<PseudoOutcomes> {
    let groups = ds
        .group()
        .ok_or_else(|| Error::InvalidData("conditional pseudo-outcomes need a group column".into()))?;
    Ok(PseudoOutcomes {
        values: compute(ds, nm, Some(groups))?,
        kind: PseudoKind::Conditional,
        group: Some(groups.to_vec()),
    })
}
