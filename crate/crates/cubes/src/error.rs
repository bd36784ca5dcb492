use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: unknown ids, bad files, bad generator specs.
    #[error("input error: {0}")]
    Input(String),

    /// Data that parses but is structurally invalid (non-finite distance,
    /// asymmetric matrix, non-positive weight).
    #[error("data error: {0}")]
    Data(String),

    /// A parameter violates one of the admissible bounds; names the bound.
    #[error("constraint error: {0}")]
    Constraint(String),

    /// Construction produced same-generation cubes that overlap.
    #[error("materialization aborted: {0}")]
    Materialize(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
