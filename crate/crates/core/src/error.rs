use thiserror::Error;

/// Failures surfaced by the library. Display strings are stable and used
/// verbatim in CLI reports.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("empty-subset")]
    EmptySubset,
    #[error("window-too-large: estimated {estimate} points exceeds cap {cap}")]
    WindowTooLarge { estimate: u64, cap: u64 },
    #[error("window-too-small: {0}")]
    WindowTooSmall(String),
    #[error("bad-subgroup-spec: {0}")]
    BadSubgroupSpec(String),
    #[error("unknown-fixture: {0}")]
    UnknownFixture(String),
    #[error("complex-too-large: per-dimension estimates {per_dim:?} exceed cap {cap}")]
    ComplexTooLarge { per_dim: Vec<u64>, cap: u64 },
    #[error("not-a-subcomplex")]
    NotASubcomplex,
    #[error("not-a-cycle")]
    NotACycle,
    #[error("not-chain-map")]
    NotChainMap,
    #[error("schedule-exhausted: no fill for simplex {simplex:?}")]
    ScheduleExhausted { simplex: Vec<u32> },
    #[error("shape-mismatch: {0}")]
    ShapeMismatch(String),
    #[error("collar-violation: {0}")]
    CollarViolation(String),
    #[error("parameter-mismatch: {0}")]
    ParameterMismatch(String),
    #[error("dichotomy-failed: simplex {simplex:?} lies in neither side")]
    DichotomyFailed { simplex: Vec<u32> },
    #[error("invalid-parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
