use crate::model::IvaId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid job: {0}")]
    InvalidJob(String),
    #[error("parameter out of range: {0}")]
    Range(String),
    #[error("divisibility violated: {0}")]
    Divisibility(String),
    #[error("wrong length: expected {expected} bits, got {actual}")]
    WrongLength { expected: usize, actual: usize },
    #[error("wrong number of intermediate values: expected {expected}, got {actual}")]
    WrongCount { expected: usize, actual: usize },
    #[error("assignment is invalid: {0}")]
    InvalidAssignment(String),
    #[error("assignment leaves {0} uncomputed")]
    Infeasible(IvaId),
    #[error("node {node} cannot encode signal: {iva} was not computed locally")]
    MissingConstituent { node: usize, iva: IvaId },
    #[error("node {node} could not recover {iva}")]
    Undecodable { node: usize, iva: IvaId },
    #[error("node {node} decoded a wrong value for {iva}")]
    DecodeMismatch { node: usize, iva: IvaId },
    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    SearchCap { size: u128, cap: u128 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than by a failed run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidJob(_)
                | Error::Range(_)
                | Error::Divisibility(_)
                | Error::SearchCap { .. }
                | Error::Parse(_)
                | Error::Json(_)
        )
    }
}
