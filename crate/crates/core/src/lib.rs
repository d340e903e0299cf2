//! Two-group SIS/SIR epidemics with homophily and endogenous vaccination.
//!
//! Every routine is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`.

pub mod error;
pub mod linalg;
pub mod linearized;
pub mod model;
pub mod ode;
pub mod params;
pub mod scalar;
pub mod sir;
pub mod statics;
pub mod steady_state;
pub mod vaccination;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelParams = params::ModelParams<f64>;
pub type InfectionState = params::InfectionState<f64>;
pub type Mat2 = linalg::Mat2<f64>;
pub type Trajectory = model::Trajectory<f64>;
pub type SteadyState = steady_state::SteadyState<f64>;
pub type LinearizedSystem = linearized::LinearizedSystem<f64>;
pub type CumulativeInfection = linearized::CumulativeInfection<f64>;
pub type VaccinationParams = vaccination::VaccinationParams<f64>;
pub type VaccinationEquilibrium = vaccination::VaccinationEquilibrium<f64>;
pub type MixedEquilibrium = vaccination::MixedEquilibrium<f64>;
pub type WelfareReport = vaccination::WelfareReport<f64>;
pub type SirState = sir::SirState<f64>;
pub type FinalSize = sir::FinalSize<f64>;

/// Single-precision parameter set.
pub type ModelParamsF32 = params::ModelParams<f32>;
/// Single-precision steady state.
pub type SteadyStateF32 = steady_state::SteadyState<f32>;

pub use steady_state::{SteadyKind, THRESHOLD_BAND};
pub use statics::{ParamId, ShiftParam};
pub use vaccination::{Classification, Level, MixedVariant, ModelKind};
