use thiserror::Error;

use crate::text::ParseError;

/// Errors produced by game construction and analysis operations.
///
/// Parse errors keep their own type ([`ParseError`]) so they can carry line
/// numbers; they are wrapped here when an operation does both IO and parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("unknown info state `{0}`")]
    UnknownInfoState(String),

    #[error("unknown action `{action}` at info state `{info_state}`")]
    UnknownAction { info_state: String, action: String },

    #[error("unknown player `{0}`")]
    UnknownPlayer(String),

    #[error("policy for {player} does not cover info state `{info_state}`")]
    PolicyCoverage { player: String, info_state: String },

    #[error("distribution at `{at}` sums to {sum}, expected 1 within 1e-12")]
    NotNormalized { at: String, sum: f64 },

    #[error("negative probability {prob} at `{at}`")]
    NegativeProbability { at: String, prob: f64 },

    #[error("{count} joint assignments exceed the enumeration cap {cap}")]
    EnumerationTooLarge { count: u128, cap: u64 },

    #[error("{count} joint chance assignments exceed the cap {cap}")]
    ChanceEnumerationTooLarge { count: u128, cap: u64 },

    #[error("game is not two-player zero-sum: {0}")]
    AsymmetricGame(String),

    #[error("missing value-table entry for info state `{0}`")]
    MissingTableEntry(String),

    #[error("info state `{0}` has zero own-visit probability in the empirical table")]
    ZeroOwnReach(String),

    #[error("regression design is singular; use a positive ridge")]
    SingularDesign,

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
