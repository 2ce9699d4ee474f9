use thiserror::Error;

/// Reasons a proof-chain graph refuses an entity or link at build time.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("link `{link}` references unknown entity `{entity}`")]
    DanglingEndpoint { link: String, entity: String },
    #[error("link `{0}` would introduce a cycle")]
    Cycle(String),
    #[error("zero-knowledge link `{0}` must cross from the private to the public domain")]
    DomainCrossing(String),
    #[error("logical link `{0}` starts at a private entity without disclosed inputs")]
    NeedsZeroKnowledge(String),
    #[error("link `{0}` declares a strength class that does not match its kind")]
    StrengthMismatch(String),
    #[error("link `{0}` carries evidence for a different link kind")]
    EvidenceMismatch(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("value out of range: {0}")]
    Range(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("proof generation refused: {0}")]
    ProofGeneration(String),
    #[error("timestamp {got} precedes ledger tip timestamp {tip}")]
    Ordering { tip: u64, got: u64 },
    #[error("conflict: {0}")]
    Conflict(String),
    #[error("not found: {0}")]
    Lookup(String),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("malformed encoding: {0}")]
    Encoding(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
