use thiserror::Error;

/// Errors raised by every layer of the crate, from poset construction up to
/// program evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("cover relation has a cycle through `{0}`")]
    CycleDetected(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("poset has {size} elements, enumeration bound is {bound}")]
    TooLarge { size: usize, bound: usize },
    #[error("set is not upward closed")]
    NotUpperSet,
    #[error("objects live on different posets: `{0}` vs `{1}`")]
    PosetMismatch(String, String),
    #[error("total mass {0} exceeds one")]
    MassExceedsOne(String),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("value {0} lies outside [0,1]")]
    OutOfRange(String),
    #[error("map is not monotone: {0}")]
    NotMonotone(String),
    #[error("Kleisli map is not Scott-continuous: f({0}) is not below f({1})")]
    NotContinuous(String, String),
    #[error("step-map chain is not pointwise monotone at link {0}")]
    ChainNotMonotone(usize),
    #[error("invalid CDF: {0}")]
    InvalidCdf(String),
    #[error("invalid step map: {0}")]
    InvalidStepMap(String),
    #[error("invalid rational `{0}`")]
    InvalidRational(String),
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("resolution error: {0}")]
    Resolution(String),
    #[error("recursive definitions: {0}")]
    Recursion(String),
    #[error("case arms are not monotone in the scrutinee: {0}")]
    ContinuityViolation(String),
    #[error("no {kind} named `{name}`")]
    NameNotFound { kind: &'static str, name: String },
    #[error("{0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
