//! Numerical kernels for the 1D barotropic compressible Navier-Stokes
//! equations in mass-Lagrangian coordinates: spectral fields on the torus,
//! Littlewood-Paley/Besov machinery, pressure and viscosity laws, coordinate
//! changes, the exact linearized propagator, and exponential time integrators.

pub mod error;
mod fft;
pub mod field;
pub mod lp;
pub mod model;
pub mod propagator;
pub mod solver;
pub mod transforms;

pub use error::{CoreError, Result};
pub use field::{FluidState, SpectralField};
pub use lp::{
    besov_norm, bony_decompose, hybrid_norms, record_blocks, tilde_norm, tilde_norm_weighted,
    BesovSpec, BlockNormHistory, DyadicFilterBank, FreqRange, SumExp, TimeExp,
};
pub use model::{DecayFunctionals, ModelParams, PressureLaw, ViscosityLaw};
pub use propagator::{LinearParams, ModeSolution, PropagatorTable, Regime};
pub use solver::{Scheme, SolverConfig, Trajectory, Variant};
pub use transforms::{CoordinateMap, EulerianState};
