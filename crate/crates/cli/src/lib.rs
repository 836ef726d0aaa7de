//! Experiment harness for the Lagrangian compressible Navier-Stokes
//! toolkit: configuration, drivers, rate fitting, and report emission.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod ode;
pub mod report;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use fitting::{fit_rate, FitResult};
