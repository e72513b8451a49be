use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report. Variants that carry a witness name
/// the offending multi-index or integer vector so callers can write it out.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "ambiguous resonance: |<omega, {q:?}>| = {value:e} is below tolerance but {q:?} is not in the declared lattice"
    )]
    AmbiguousResonance { q: Vec<i64>, value: f64 },

    #[error("every integer vector with |q| <= {bound} is resonant")]
    DegenerateLattice { bound: usize },

    #[error("resonance lattice has rank {rank}, corank-one decomposition needs rank {required}")]
    NotCorankOne { rank: usize, required: usize },

    #[error("exp-polynomial has no limit at infinity: term delta^{s} with zero rate and coefficient {coeff}")]
    NoLimit { s: u32, coeff: String },

    #[error("exp-polynomial term cap exceeded ({len} > {cap})")]
    TermCapExceeded { len: usize, cap: usize },

    #[error("precondition violated in {op}: {detail}")]
    Precondition { op: &'static str, detail: String },

    #[error("argument outside domain in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("invariant violated in {op}: {detail}")]
    Invariant { op: &'static str, detail: String },

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("malformed JSON: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
