use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A coefficient needed by a model is absent from the calibration set.
    #[error("calibration lookup failed for {key}")]
    CalibrationLookup { key: String },

    #[error("calibration load error at `{key}`: {reason}")]
    CalibrationLoad { key: String, reason: String },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// The inputs fall outside the domain where a model is defined.
    #[error("model domain error: {0}")]
    ModelDomain(String),

    #[error("invalid cluster state: {0}")]
    InvalidState(String),

    #[error("invalid scenario parameters: {0}")]
    InvalidParams(String),

    #[error("plan does not match problem: {0}")]
    DimensionMismatch(String),

    /// The all-on load-balanced reference placement does not fit.
    #[error("baseline infeasible: {0}")]
    BaselineInfeasible(String),

    #[error("search space of {estimate:.3e} plans exceeds the cap of {cap}")]
    SearchSpaceTooLarge { estimate: f64, cap: u64 },
}
