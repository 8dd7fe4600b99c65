use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("payoff matrix H is singular")]
    SingularPayoff,

    #[error("equilibrium system singular (Radner hypothesis violated): {0}")]
    EquilibriumSingular(String),

    #[error("inconsistent covariance: {0}")]
    InconsistentCovariance(String),

    #[error("reduction inapplicable: {0}")]
    ReductionInapplicable(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
