use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid boundary profile {0}: {1}")]
    InvalidProfile(String, &'static str),

    #[error("{n} boundary elements exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("alphabet of {len} letters exceeds the up-set enumeration cap of {cap}")]
    UpsetCap { len: usize, cap: usize },

    #[error("invalid letter encoding: {0}")]
    InvalidLetter(String),

    #[error("profile mismatch: {0}")]
    ProfileMismatch(String),

    #[error("letter set is not increasing")]
    NotAnUpset,

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("code {code} is not available for this configuration: {reason}")]
    UnsupportedCode { code: String, reason: String },

    #[error("state count {count} at step {step} exceeds the cap of {cap}")]
    StateCap { step: usize, count: usize, cap: usize },

    #[error("strong connectivity is not transitive for a word (counterexample: {0})")]
    StrongNotTransitive(String),

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("distribution over {got} letters does not match alphabet of {expected}")]
    AlphabetMismatch { expected: usize, got: usize },

    #[error("rounding slack {slack:e} exceeds sanity bound {bound:e}")]
    SlackBlowup { slack: f64, bound: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("site constant {0} is not a valid rigorous lower bound (must lie in (0, 0.556])")]
    SiteConstant(f64),

    #[error("cache file {path}: {reason}")]
    Cache { path: String, reason: String },

    #[error("malformed certificate: {0}")]
    Certificate(String),

    #[error("realization too deep: {side} cells per side exceeds {cap}")]
    DepthCap { side: u64, cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
