//! Monte Carlo laboratory: data generators with known truths, the four
//! nuisance scenarios, and a resumable grid runner.

pub mod generate;
pub mod grid;
pub mod models;
pub mod scenario;

pub use generate::{gen_model1, gen_model2, gen_modifier, generate, GeneratorMeta};
pub use grid::{run_grid, SimGrid};
pub use models::SimModel;
pub use scenario::{
    fit_scenario_nuisance, replicate_p_value, run_replicate, run_scenario, scenario_p_values, NuisanceScenario,
    RejectionEstimate, SimScenario,
};
