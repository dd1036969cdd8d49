use thiserror::Error;

/// Errors raised across the gate-design pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("permanent of a {0}x{0} matrix is unsupported (limit 30)")]
    UnsupportedSize(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-conserving amplitude requested: {input} photons in, {output} photons out")]
    NonConserving { input: usize, output: usize },

    #[error("outcome strips computational photons: {available} photons available, outcome needs {requested} plus 2")]
    OutcomeStripsPhotons { available: usize, requested: usize },

    #[error("null branch: outcome has zero amplitude")]
    NullBranch,

    #[error("KAK requires unitary input (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("not subunitary; normalize first (spectral norm {0})")]
    NotSubunitary(f64),

    #[error("infeasible: resources insufficient for unit fidelity (best fidelity {best_fidelity:.9})")]
    Infeasible { best_fidelity: f64 },

    #[error("missing prerequisite record for gate {0}")]
    MissingRecord(String),

    #[error("invalid angle {0:?}")]
    Angle(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
