use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::generate;
use super::models::SimModel;
use crate::data::{Dataset, TestConfig, WeightSpec};
use crate::effect_test::run_test;
use crate::error::{Error, Result};
use crate::modifier::run_modifier_test;
use crate::nuisance::{
    fit_beta_propensity, fit_linear_outcome, fit_logistic_outcome, BetaFitOptions, CovariateTransform,
    NuisanceModel, OutcomeBasis, OutcomeModel, PropensityBasis, PropensityModel, Provenance,
};
use crate::rng::{derive_seed, stream};

/// Nuisance specification of a simulation cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NuisanceScenario {
    /// Propensity on the true covariates, outcome on the transformed ones.
    PropensityCorrect = 1,
    /// Outcome on the true covariates, propensity on the transformed ones.
    OutcomeCorrect = 2,
    /// Both models on the true covariates.
    BothCorrect = 3,
    /// Both models on flexible polynomial bases.
    Flexible = 4,
}

impl NuisanceScenario {
    pub const ALL: [Self; 4] = [
        Self::PropensityCorrect,
        Self::OutcomeCorrect,
        Self::BothCorrect,
        Self::Flexible,
    ];

    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::PropensityCorrect),
            2 => Ok(Self::OutcomeCorrect),
            3 => Ok(Self::BothCorrect),
            4 => Ok(Self::Flexible),
            _ => Err(Error::InvalidConfig(format!("scenario must be 1..=4, got {i}"))),
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

/// One cell of the Monte Carlo grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub model: SimModel,
    pub scenario: NuisanceScenario,
    pub n: usize,
    pub delta: f64,
    pub reps: usize,
    /// Grid size of the weight range, which is resolved per replicate.
    pub grid_points: usize,
    pub test: TestConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RejectionEstimate {
    /// Share of successful replicates with `p <= alpha`.
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub se: f64,
    pub rejections: usize,
    /// Replicates that produced a p-value.
    pub reps: usize,
    /// Replicates that errored; excluded from `rate` but never hidden.
    pub failed: usize,
}

impl RejectionEstimate {
    pub fn from_outcomes(rejected: &[Option<bool>]) -> Self {
        let ok: Vec<bool> = rejected.iter().flatten().copied().collect();
        let reps = ok.len();
        let rejections = ok.iter().filter(|&&r| r).count();
        let rate = if reps == 0 { f64::NAN } else { rejections as f64 / reps as f64 };
        let se = if reps == 0 { f64::NAN } else { (rate * (1.0 - rate) / reps as f64).sqrt() };
        Self {
            rate,
            se,
            rejections,
            reps,
            failed: rejected.len() - reps,
        }
    }
}

/// Fits the nuisance pair a scenario prescribes to simulated data.
pub fn fit_scenario_nuisance(
    model: SimModel,
    scenario: NuisanceScenario,
    ds: &Dataset,
    trunc_floor: f64,
) -> Result<NuisanceModel> {
    use CovariateTransform::{Identity, KangSchafer};
    let (prop_tf, prop_basis, out_tf, flexible) = match scenario {
        NuisanceScenario::PropensityCorrect => (Identity, PropensityBasis::Linear, KangSchafer, false),
        NuisanceScenario::OutcomeCorrect => (KangSchafer, PropensityBasis::Linear, Identity, false),
        NuisanceScenario::BothCorrect => (Identity, PropensityBasis::Linear, Identity, false),
        NuisanceScenario::Flexible => (Identity, PropensityBasis::Flexible, Identity, true),
    };
    let prop = fit_beta_propensity(ds, &BetaFitOptions::new(model.scale(), prop_tf).basis(prop_basis))?;
    let out = match (model, flexible) {
        (SimModel::Model1, false) => fit_logistic_outcome(ds, OutcomeBasis::Cubic, out_tf)?,
        (SimModel::Model1, true) => fit_logistic_outcome(ds, OutcomeBasis::Flexible, out_tf)?,
        (_, false) => fit_linear_outcome(ds, OutcomeBasis::LinearBump, out_tf)?,
        (_, true) => fit_linear_outcome(ds, OutcomeBasis::Flexible, out_tf)?,
    };
    let provenance = match scenario {
        NuisanceScenario::PropensityCorrect | NuisanceScenario::OutcomeCorrect => Provenance::Misspecified,
        _ => Provenance::Fitted,
    };
    NuisanceModel::new(
        PropensityModel::Beta(prop),
        OutcomeModel::Fitted(out),
        trunc_floor,
        provenance,
    )
}

/// Seed of the bootstrap streams of replicate `r`.
pub fn replicate_test_seed(master_seed: u64, r: u64) -> u64 {
    derive_seed(derive_seed(master_seed, r), 1)
}

/// Runs replicate `r`: generate, fit, test. Returns the p-value.
pub fn replicate_p_value(sc: &SimScenario, master_seed: u64, r: u64) -> Result<f64> {
    let mut rng = stream(master_seed, &[r, 0]);
    let ds = generate(sc.model, sc.n, sc.delta, &mut rng);
    let nm = fit_scenario_nuisance(sc.model, sc.scenario, &ds, sc.test.trunc_floor)?;
    let weight = WeightSpec {
        grid_points: sc.grid_points,
        ..WeightSpec::default_for(ds.treatment())
    };
    let cfg = TestConfig {
        seed: replicate_test_seed(master_seed, r),
        weight: Some(weight),
        ..sc.test.clone()
    };
    Ok(match sc.model {
        SimModel::Modifier => run_modifier_test(&ds, &nm, &cfg)?.p_value,
        SimModel::Model1 | SimModel::Model2 => run_test(&ds, &nm, &cfg)?.p_value,
    })
}

/// Runs replicate `r` and returns `p <= alpha`.
pub fn run_replicate(sc: &SimScenario, master_seed: u64, r: u64) -> Result<bool> {
    Ok(replicate_p_value(sc, master_seed, r)? <= sc.test.alpha)
}

/// P-values of the `sc.reps` replicates in replicate order, `None` where a
/// replicate failed. Replicate `r` draws from its own stream, so results do
/// not depend on the thread count.
pub fn scenario_p_values(sc: &SimScenario, master_seed: u64) -> Vec<Option<f64>> {
    (0..sc.reps as u64)
        .into_par_iter()
        .map(|r| match replicate_p_value(sc, master_seed, r) {
            Ok(p) => Some(p),
            Err(e) => {
                log::warn!("replicate {r} of {} n={} delta={} failed: {e}", sc.model, sc.n, sc.delta);
                None
            }
        })
        .collect()
}

/// Rejection rate over `sc.reps` independent replicates.
pub fn run_scenario(sc: &SimScenario, master_seed: u64) -> RejectionEstimate {
    let outcomes: Vec<Option<bool>> = scenario_p_values(sc, master_seed)
        .into_iter()
        .map(|p| p.map(|p| p <= sc.test.alpha))
        .collect();
    RejectionEstimate::from_outcomes(&outcomes)
}
