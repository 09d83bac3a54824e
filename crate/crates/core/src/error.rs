use thiserror::Error;

use crate::functional::Certificate;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("malformed word {text:?}: {reason}")]
    BadWord { text: String, reason: String },

    #[error("data incomplete: no value stored for {0}")]
    DataIncomplete(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("not Hermitian: {0}")]
    NotHermitian(String),

    #[error("functional is not strictly positive (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive {
        min_eigenvalue: f64,
        certificate: Box<Certificate>,
    },

    #[error("invalid recurrence coefficients at (n={n}, k={k}): {reason}")]
    InvalidCoefficients { n: usize, k: usize, reason: String },

    #[error("B_{n} is ill-conditioned (condition number {condition:e} exceeds {bound:e})")]
    IllConditioned { n: usize, condition: f64, bound: f64 },

    #[error("level shortfall: need level {needed}, have {available}")]
    LevelShortfall { needed: usize, available: usize },

    #[error("Szego coefficient for word {word} has modulus {modulus} >= 1")]
    SzegoCoefficient { word: String, modulus: f64 },

    #[error("internal consistency check failed: {what} (residual {residual:e})")]
    Consistency { what: String, residual: f64 },

    #[error("series does not reach tolerance {tol:e} within {cap} terms (ratio {ratio})")]
    Convergence { tol: f64, cap: usize, ratio: f64 },

    #[error("point is not in the {region} (lambda_min = {lambda_min:e})")]
    Membership { region: &'static str, lambda_min: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed or incomplete input, as opposed to
    /// a mathematical check that failed on well-formed data.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::BadWord { .. }
                | Error::DataIncomplete(_)
                | Error::Dimension(_)
                | Error::Json(_)
                | Error::Io(_)
                | Error::LevelShortfall { .. }
                | Error::Domain(_)
                | Error::NotHermitian(_)
        )
    }
}
