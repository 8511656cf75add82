//! Collateral haircuts from a mixed-exponential jump-diffusion model of
//! collateral log returns.

pub mod analytics;
pub mod error;
pub mod estimate;
pub mod haircut;
pub mod levy;
pub mod loss;
pub mod optim;
pub mod series;
pub mod simulate;
pub mod special;
pub mod transform;

pub use analytics::{EmpiricalRisk, ParameterShift, SensitivityTable, ShiftTarget};
pub use error::{Error, Result};
pub use estimate::{EstimationResult, SampleStats, Stage};
pub use haircut::{HaircutCriterion, HaircutSolution, HaircutSolver, RatingTargetTable, RiskMeasure, TargetKind};
pub use levy::{DejdParams, JumpDiffusionModel, JumpMixture, Moments, TimeConvention};
pub use loss::{LossPricer, LossSetup};
pub use series::{PriceSeries, ReturnSeries};
pub use transform::{Inversion, InversionConfig, InversionDiagnostics, TransformKind};
