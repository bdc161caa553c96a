use thiserror::Error;

pub type Result<T> = std::result::Result<T, MfgError>;

/// Failures raised by the solvers. Variant names double as the error names
/// reported by the command-line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MfgError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },
    #[error("potential has a plateau maximum near x = {x}")]
    PlateauMax { x: f64 },
    #[error("density must be positive, got {m}")]
    NonPositiveDensity { m: f64 },
    #[error("m -> F_j(m) is not unimodal for j = {j}")]
    NotUnimodal { j: f64 },
    #[error("right-hand side {rhs} lies below the critical value {critical}")]
    BelowCritical { rhs: f64, critical: f64 },
    #[error("could not bracket a root: {0}")]
    NoBracket(String),
    #[error("mass {mass} at the critical Hamiltonian overshoots the target on the {branch} branch")]
    NoSolutionInBranch { branch: &'static str, mass: f64 },
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("kink point x0 = {x0} has V(x0) = {v} >= Hbar = {hbar}")]
    KinkInfeasible { x0: f64, v: f64, hbar: f64 },
    #[error("only the smooth solution exists; the kinked variant is unavailable")]
    SmoothOnly,
    #[error("potential has {count} maxima where one is required")]
    MultiMax { count: usize },
    #[error("potential has {found} maxima, expected {expected}")]
    MaxCount { expected: usize, found: usize },
    #[error("the switching path does not cross unit mass")]
    NoRootOnPath,
    #[error("variant infeasible: {0}")]
    VariantInfeasible(String),
    #[error("no d1 in [0, d2) gives unit mass for d2 = {d2}")]
    NoD1 { d2: f64 },
    #[error("Hbar = {hbar} is not above the critical value {critical}")]
    NotAboveCritical { hbar: f64, critical: f64 },
    #[error("hypothesis fails: {0}")]
    HypothesisFails(String),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("non-finite Newton step at iteration {iteration}")]
    NonFiniteStep { iteration: usize },
    #[error("no Hbar in the admissible range gives unit mass: {0}")]
    MassInfeasible(String),
}

impl MfgError {
    pub fn name(&self) -> &'static str {
        match self {
            MfgError::InvalidInput(_) => "InvalidInput",
            MfgError::NonFinite { .. } => "NonFinite",
            MfgError::PlateauMax { .. } => "PlateauMax",
            MfgError::NonPositiveDensity { .. } => "NonPositiveDensity",
            MfgError::NotUnimodal { .. } => "NotUnimodal",
            MfgError::BelowCritical { .. } => "BelowCritical",
            MfgError::NoBracket(_) => "NoBracket",
            MfgError::NoSolutionInBranch { .. } => "NoSolutionInBranch",
            MfgError::WrongRegime(_) => "WrongRegime",
            MfgError::KinkInfeasible { .. } => "KinkInfeasible",
            MfgError::SmoothOnly => "SmoothOnly",
            MfgError::MultiMax { .. } => "MultiMax",
            MfgError::MaxCount { .. } => "MaxCount",
            MfgError::NoRootOnPath => "NoRootOnPath",
            MfgError::VariantInfeasible(_) => "VariantInfeasible",
            MfgError::NoD1 { .. } => "NoD1",
            MfgError::NotAboveCritical { .. } => "NotAboveCritical",
            MfgError::HypothesisFails(_) => "HypothesisFails",
            MfgError::NoConvergence { .. } => "NoConvergence",
            MfgError::NonFiniteStep { .. } => "NonFiniteStep",
            MfgError::MassInfeasible(_) => "MassInfeasible",
        }
    }
}
