use thiserror::Error;

/// Errors raised by the library. Every variant maps to a stable upper-case
/// code (see [`Error::code`]) that the command-line front end prints.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("total mass {total} is not within {tol:e} of 1")]
    SumNotOne { total: f64, tol: f64 },

    #[error("lattice distribution carries mass {mass} at the origin")]
    InvalidAtomAtZero { mass: f64 },

    #[error("input has empty support")]
    EmptySupport,

    #[error("negative or non-finite mass {value} at index {index}")]
    NegativeMass { index: usize, value: f64 },

    #[error("mean undefined: tail mass {tail_mass} lies beyond the stored support")]
    TailMassPresent { tail_mass: f64 },

    #[error("target step {target} is not a positive integer multiple of grid step {step}")]
    StepMismatch { target: f64, step: f64 },

    #[error("sequence length must be non-negative, got {0}")]
    NNegative(i64),

    #[error("requested size {requested} exceeds the cap {cap}")]
    XTooLarge { requested: usize, cap: usize },

    #[error("window {h} is not a positive multiple of the grid step {step}")]
    HNotGridAligned { h: f64, step: f64 },

    #[error("transform diverges at Re s = {re} (need Re s > 1)")]
    DivergentRegion { re: f64 },

    #[error("tail of a non-summable sequence is unbounded on Re s = 1")]
    TailUnbounded,

    #[error("truncation tail bound is not available: {0}")]
    TruncationUnbounded(String),

    #[error("|z| = {modulus} lies outside the open unit disc")]
    OutsideDisc { modulus: f64 },

    #[error("grid step {step} is too coarse for window {h} (need step <= h/10)")]
    GridTooCoarse { step: f64, h: f64 },

    #[error("boundary grid is empty")]
    EmptyGrid,

    #[error("composite Simpson needs an even number of intervals, got {0}")]
    OddIntervals(usize),

    #[error("evaluator failed: {0}")]
    EvaluatorFailure(String),

    #[error("Aitken residual {residual} exceeds the raw sequence spread {spread}")]
    Nonconvergent { residual: f64, spread: f64 },

    #[error("sigma schedule did not converge (last change {last_change:e})")]
    ScheduleNotConverged { last_change: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SumNotOne { .. } => "SUM_NOT_ONE",
            Error::InvalidAtomAtZero { .. } => "INVALID_ATOM_AT_ZERO",
            Error::EmptySupport => "EMPTY_SUPPORT",
            Error::NegativeMass { .. } => "NEGATIVE_MASS",
            Error::TailMassPresent { .. } => "TAIL_MASS_PRESENT",
            Error::StepMismatch { .. } => "STEP_MISMATCH",
            Error::NNegative(_) => "N_NEGATIVE",
            Error::XTooLarge { .. } => "X_TOO_LARGE",
            Error::HNotGridAligned { .. } => "H_NOT_GRID_ALIGNED",
            Error::DivergentRegion { .. } => "DIVERGENT_REGION",
            Error::TailUnbounded => "TAIL_UNBOUNDED",
            Error::TruncationUnbounded(_) => "TRUNCATION_UNBOUNDED",
            Error::OutsideDisc { .. } => "OUTSIDE_DISC",
            Error::GridTooCoarse { .. } => "GRID_TOO_COARSE",
            Error::EmptyGrid => "EMPTY_GRID",
            Error::OddIntervals(_) => "ODD_INTERVALS",
            Error::EvaluatorFailure(_) => "EVALUATOR_FAILURE",
            Error::Nonconvergent { .. } => "NONCONVERGENT",
            Error::ScheduleNotConverged { .. } => "SCHEDULE_NOT_CONVERGED",
            Error::InvalidParameter { .. } => "INVALID_PARAMETER",
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
