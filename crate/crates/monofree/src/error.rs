use num_rational::BigRational;
use thiserror::Error;

/// Errors surfaced by the engine. The CLI maps these onto its exit-code
/// contract (input errors -> 4, non-stabilized -> 3).
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("presentation error: {0}")]
    Presentation(String),

    #[error("closure error: {0}")]
    Closure(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("moment spec `{label}` exhausted: order {needed} requested, max_order is {max_order}")]
    SpecExhausted {
        label: String,
        needed: usize,
        max_order: usize,
    },

    #[error("no stabilization before truncation cap {cap}: value at m={at} is {lo}, at m={at_next} is {hi}")]
    NonStabilized {
        cap: u32,
        at: u32,
        at_next: u32,
        lo: BigRational,
        hi: BigRational,
    },
}

pub type Result<T> = std::result::Result<T, EngineError>;
