use thiserror::Error;

/// Errors raised by the SPOT building blocks and entity state machines.
///
/// A cryptographic check that simply does not hold is reported as a `false`
/// verdict, never as an error. Errors are reserved for inputs that cannot be
/// evaluated at all.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unsupported security level: {0} bits")]
    UnsupportedSecurityLevel(u32),

    #[error("security level {requested} is served by curve {expected}, not {actual}")]
    CurveMismatch {
        requested: u32,
        expected: &'static str,
        actual: &'static str,
    },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("message length must be at least 1")]
    EmptyMessageSpace,

    #[error("malformed encoding: {0}")]
    Malformed(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("witness does not satisfy equation {0}")]
    UnsatisfiedEquation(usize),

    #[error("proxy credential is not certified by this group manager")]
    InvalidCredential,

    #[error("EBID must be nonzero")]
    ZeroEbid,

    #[error("EBIDs are equal; contact dropped for this epoch")]
    EbidTie,

    #[error("proxy roster needs at least one primary and one secondary proxy")]
    InsufficientRoster,

    #[error("unknown user")]
    UnknownUser,

    #[error("user is not marked infected; contact list refused")]
    UserNotInfected,

    #[error("verified set signature does not verify under the health authority key")]
    InvalidSetSignature,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
