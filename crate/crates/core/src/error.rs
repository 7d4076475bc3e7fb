use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: String,
        actual: String,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("no data: {0}")]
    NoData(&'static str),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("invalid rank: requested {requested}, available {available}")]
    InvalidRank { requested: usize, available: usize },

    #[error("labels contain a single class")]
    DegenerateLabels,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("too few replicates: {got} < {min}")]
    TooFewReplicates { got: usize, min: usize },

    #[error("numerical degeneracy: {0}")]
    Degenerate(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    pub(crate) fn shape(
        context: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    ) -> Self {
        use alloc::format;
        Error::DimensionMismatch {
            context,
            expected: format!("{}x{}", expected.0, expected.1),
            actual: format!("{}x{}", actual.0, actual.1),
        }
    }

    pub(crate) fn len(context: &'static str, expected: usize, actual: usize) -> Self {
        use alloc::string::ToString;
        Error::DimensionMismatch {
            context,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Degenerate(_))
    }
}
