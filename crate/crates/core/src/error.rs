use thiserror::Error;

/// Errors split into two families: domain errors (bad inputs, broken
/// preconditions) and resource errors (size limits). The CLI maps them to
/// exit codes 1 and 2 respectively.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("prior `{label}` is not centered: mean = {mean:e} exceeds tolerance {tol:e}")]
    NotCentered { label: String, mean: f64, tol: f64 },

    #[error("prior `{label}` has a single support point; the threshold theory requires at least two")]
    DegeneratePrior { label: String },

    #[error("{what} = {value} out of range ({expected})")]
    OutOfRange {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("quadrature order {order} exceeds the limit of {limit}")]
    QuadratureOrder { order: usize, limit: usize },

    #[error("tensor with {entries} entries exceeds the limit of {limit}")]
    TensorTooLarge { entries: u128, limit: u64 },

    #[error(
        "exact enumeration over {configs} configurations exceeds the limit of {limit}; \
         use the Monte Carlo path"
    )]
    EnumerationLimit { configs: u128, limit: u64 },

    #[error(
        "sup Gamma_b is already positive at the smallest scan point b = {b} (sup = {sup:e}); \
         no high-temperature bracket exists for this prior"
    )]
    BracketFailure { b: f64, sup: f64 },

    #[error("sup Gamma_b never turned positive up to b = {b_max}; no transition found")]
    NoTransition { b_max: f64 },
}

impl Error {
    /// True for size-limit failures, false for domain/precondition failures.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::QuadratureOrder { .. }
                | Error::TensorTooLarge { .. }
                | Error::EnumerationLimit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
