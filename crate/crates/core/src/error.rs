use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} outside window [{start}, {end})")]
    OutOfWindow { index: i64, start: i64, end: i64 },

    #[error("vector must vanish on a two-site margin at each end of the window")]
    InsufficientMargin,

    #[error("window of length {len} too small for factors of length {n} (need {needed})")]
    WindowTooSmall { len: usize, n: usize, needed: usize },

    #[error("no square repetition among candidate scales {candidates:?}")]
    NoRepetitionFound { candidates: Vec<u64> },

    #[error("repetition violated at offset {offset} for scale {scale}")]
    RepetitionViolated { scale: u64, offset: i64 },

    #[error("|tr T(n,0;z)| = {trace} exceeds bound c = {bound}")]
    TraceBoundViolated { trace: f64, bound: f64 },

    #[error("eigensolver failed: {0}")]
    EigensolveFailure(String),

    #[error("overflow at step {step}")]
    Overflow { step: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
