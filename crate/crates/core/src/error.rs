use thiserror::Error;

/// Errors raised by the measure, engine, metric and lab layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("operation requires an integer-supported measure")]
    NonIntegerSupport,

    #[error("invalid offspring family: {0}")]
    InvalidFamily(String),

    #[error("truncation infeasible: {0}")]
    TruncationInfeasible(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("offspring law is not supercritical (mean {mean}, {class})")]
    NotSupercritical { mean: f64, class: &'static str },

    #[error("extinction probability is zero; cannot condition on extinction")]
    ZeroExtinction,

    #[error("survival probability {0:e} is below 1e-12; cannot condition on survival")]
    NullSurvival(f64),

    #[error("extinction solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("truncation budget exhausted at step {step}: {atoms} atoms retained exceeds the limit {limit}")]
    BudgetExhausted { step: usize, atoms: usize, limit: usize },

    #[error("population cap {cap} cannot be represented with maximal offspring {max_offspring}")]
    CapOverflow { cap: u64, max_offspring: u64 },

    #[error("mismatched joint laws: {0}")]
    Mismatch(String),

    #[error("coupling infeasible at eps = {eps}: achievable band mass {band_mass} < {required}")]
    CouplingInfeasible { eps: f64, band_mass: f64, required: f64 },

    #[error("simplex iteration limit reached ({0} pivots)")]
    SimplexCycling(usize),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),
}

impl Error {
    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::NonIntegerSupport => "non_integer_support",
            Error::InvalidFamily(_) => "invalid_family",
            Error::TruncationInfeasible(_) => "truncation_infeasible",
            Error::OutOfRange(_) => "out_of_range",
            Error::NotSupercritical { .. } => "not_supercritical",
            Error::ZeroExtinction => "zero_extinction",
            Error::NullSurvival(_) => "null_survival",
            Error::NoConvergence { .. } => "no_convergence",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::CapOverflow { .. } => "cap_overflow",
            Error::Mismatch(_) => "mismatch",
            Error::CouplingInfeasible { .. } => "coupling_infeasible",
            Error::SimplexCycling(_) => "simplex_cycling",
            Error::InvalidExperiment(_) => "invalid_experiment",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
