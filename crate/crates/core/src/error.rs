use thiserror::Error;

/// Errors surfaced by the numerical kernels.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("unresolvable dyadic ring: {0}")]
    UnresolvableRing(String),
    #[error("block index {j} outside bank range [{j_min}, {j_max}]")]
    BlockOutOfRange { j: i32, j_min: i32, j_max: i32 },
    #[error("empty history")]
    EmptyHistory,
    #[error("unstable reference state: Q'(eta_bar) = {0} >= 0")]
    UnstableReference(f64),
    #[error("nonpositive viscosity: nu(eta_bar) = {0}")]
    NonpositiveViscosity(f64),
    #[error("vacuum/negative specific volume: min(1+a) = {0}")]
    Vacuum(f64),
    #[error("state left perturbative regime at t = {t}: eta = {eta} outside [{lo}, {hi}]")]
    LeftAdmissibleInterval { t: f64, eta: f64, lo: f64, hi: f64 },
    #[error("nonpositive density: min(rho) = {0}")]
    NonpositiveDensity(f64),
    #[error("antiderivative not periodic: mean = {0}")]
    NonzeroMean(f64),
    #[error("negative time {0} not allowed")]
    NegativeTime(f64),
    #[error("zero frequency has no mode decomposition")]
    ZeroFrequency,
    #[error("invalid linear parameters: {0}")]
    InvalidLinearParams(String),
    #[error("kappa = {kappa} violates admissibility: {condition}")]
    InadmissibleKappa { kappa: f64, condition: String },
    #[error("need at least {need} snapshots, got {got}")]
    TooFewSnapshots { need: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
