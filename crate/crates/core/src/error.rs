use thiserror::Error;

/// Errors shared by all estimation and simulation entry points.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: length {len}, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("non-finite value at index {index}")]
    NonFiniteValue { index: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frequency index s = {s} outside 1..={max}")]
    FrequencyIndex { s: usize, max: usize },

    #[error("bandwidth m = {m} outside 1..={max}")]
    Bandwidth { m: usize, max: usize },

    #[error("bandwidth exponent {0} outside the open interval (0, 1)")]
    BandwidthExponent(f64),

    #[error("bounds ({0}, {1}) invalid: need -0.5 < delta1 < delta2, both finite")]
    Bounds(f64, f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("replication {rep} of cell (d = {d}, n = {n}) failed: {source}")]
    Replication { d: f64, n: usize, rep: u64, source: Box<Error> },

    #[error("domain: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;
