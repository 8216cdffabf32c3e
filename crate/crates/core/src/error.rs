use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse Pauli label: offending token `{token}` ({reason})")]
    Parse { token: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("{n} qubits exceeds the dense limit of {limit}")]
    DenseLimit { n: usize, limit: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate metric: every direction of E lies below the cutoff (sigma_max = {sigma_max:e})")]
    DegenerateMetric { sigma_max: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
