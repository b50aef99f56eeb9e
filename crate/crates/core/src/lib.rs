//! Doubly robust tests for continuous treatments.
//!
//! [`run_test`] asks whether a continuous treatment has any effect on the
//! outcome; [`run_modifier_test`] asks whether a discrete covariate modifies
//! that effect. Both smooth doubly robust pseudo-outcomes with local linear
//! regression, compare the fit to the null by an integrated squared
//! distance, and calibrate by a wild bootstrap. [`simlab`] reproduces the
//! Monte Carlo study of size and power.

pub mod cli;
pub mod data;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod local_linear;
pub mod modifier;
pub mod nuisance;
pub mod pseudo;
pub mod rng;
pub mod simlab;

pub use data::{load_csv, read_csv, save_csv, write_csv, Bandwidth, BootDist, CsvSchema, Dataset, ResidualMode, TestConfig, WeightSpec};
pub use effect_test::{asymptotic_null_params, run_test, run_test_on_pseudo, AsymptoticNullParams, TestResult};
pub use error::{Error, Result};
pub use kernel::{convolution_at_zero, rot_bandwidth, Epanechnikov, Kernel};
pub use local_linear::{fit_grid, CurveEstimate};
pub use modifier::{run_modifier_test, run_modifier_test_on_pseudo, ModifierTestResult};
pub use nuisance::NuisanceModel;
pub use pseudo::{compute_phi, compute_xi, PseudoOutcomes};
