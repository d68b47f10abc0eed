use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown symbol kind `{0}`")]
    UnknownKind(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("invalid coefficient sequence: {0}")]
    InvalidCoefficients(String),
    #[error("grid radius {0} is not in [0, 1)")]
    GridRadius(f64),
    #[error("H_g(f) is not well defined: {0}")]
    Undefined(String),
    #[error("dense matrix {rows}x{cols} exceeds the configured cap of {cap} entries")]
    MatrixTooLarge { rows: usize, cols: usize, cap: usize },
    #[error("theorem hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("no theorem applies to the pair {from} -> {to}")]
    NoTheorem { from: String, to: String },
    #[error("negative coefficient {value} at index {index}")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("divergent base sum: {0}")]
    DivergentBase(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
