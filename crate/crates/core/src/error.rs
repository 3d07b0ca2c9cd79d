use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected}, got {found}")]
    Arity { expected: usize, found: usize },

    #[error("conditioning on a subcube with zero mass")]
    EmptyConditioning,

    #[error("budget exceeded: {what}{}", upper_bound.as_ref().map(|u| format!(" (best upper bound found: {u}, not certified)")).unwrap_or_default())]
    Budget { what: String, upper_bound: Option<String> },

    #[error("invalid pair: {0}")]
    InvalidPair(String),

    #[error("inputs {x} and {y} are not separated by the tree")]
    NoSeparation { x: String, y: String },

    #[error("inconsistent mixture: {0}")]
    Consistency(String),

    #[error("tree and mixture are not full")]
    NotFull,

    #[error("value outside its domain: {0}")]
    Domain(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("internal invariant violated: {0}")]
    Defect(String),

    #[error("infeasible configuration: {reason}; smallest feasible n is {min_n}")]
    Infeasible { reason: String, min_n: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>) -> Self {
        Error::Budget {
            what: what.into(),
            upper_bound: None,
        }
    }

    pub(crate) fn arity(expected: usize, found: usize) -> Self {
        Error::Arity { expected, found }
    }
}
