use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed scenario: {0}")]
    MalformedScenario(String),

    #[error("{scheme} requires {requirement}")]
    Precondition { scheme: String, requirement: String },

    #[error("{0}: no activation yields a non-negative data-slot count")]
    Infeasible(String),

    #[error("scheme does not fit the scenario: {0}")]
    SchemeMismatch(String),

    #[error("super-interval of {length} slots exceeds the cap of {cap}")]
    SuperIntervalTooLong { length: u128, cap: u64 },

    #[error("exhaustive search bound exceeded: {0} relays (at most 16)")]
    SearchBoundExceeded(usize),

    #[error("pilot matrix is not invertible")]
    SingularPilot,

    #[error("{rows}×{cols} channel is rank deficient")]
    RankDeficient { rows: usize, cols: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("slope fit needs at least two points with distinct SNR")]
    TooFewRatePoints,

    #[error("payload does not match the frame plan: {0}")]
    PayloadMismatch(String),
}

impl Error {
    pub(crate) fn precondition(scheme: impl ToString, requirement: impl Into<String>) -> Self {
        Error::Precondition {
            scheme: scheme.to_string(),
            requirement: requirement.into(),
        }
    }
}
