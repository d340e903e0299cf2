//! Experiment runner for the homophily epidemic model: parameter sweeps,
//! single-point reports, CSV/JSON output and an agent-level cross-check.

pub mod config;
pub mod emit;
pub mod report;
pub mod stochastic;
pub mod sweep;

pub use config::Config;
pub use emit::{emit, read_csv, write_csv, write_json, Format};
pub use stochastic::{stochastic_cross_check, CrossCheck, CrossCheckSpec};
pub use sweep::{run_sweep, Grid, Quantity, SweepResult, SweepSpec, SweptParam};
