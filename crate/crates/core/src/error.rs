use thiserror::Error;

/// Errors produced across the toolkit.
///
/// Each variant maps onto one of the CLI exit classes: usage-type problems
/// (`InvalidDimension`, `InvalidParameter`, `UnsupportedState`, `Parse`) and
/// capacity/degenerate problems (`Capacity`, `DegenerateStructure`,
/// `HaltingFailure`, `InfeasibleK`, `InsufficientData`).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("unsupported state: {0}")]
    UnsupportedState(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error(
        "infeasible cluster count: requested k = {k}, but only {distinct} distinct states observed"
    )]
    InfeasibleK { k: usize, distinct: usize },

    #[error(
        "hierarchical clustering did not reach its halting condition before {0} clusters remained"
    )]
    HaltingFailure(usize),

    #[error("degenerate cluster structure: {0}")]
    DegenerateStructure(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that stem from data/capacity limits rather than
    /// malformed input.
    pub fn is_capacity_class(&self) -> bool {
        matches!(
            self,
            Error::Capacity(_)
                | Error::DegenerateStructure(_)
                | Error::HaltingFailure(_)
                | Error::InfeasibleK { .. }
                | Error::InsufficientData(_)
                | Error::Coverage(_)
        )
    }
}
