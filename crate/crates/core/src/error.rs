use thiserror::Error;

use crate::term::Position;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("position {0} does not exist in the term")]
    PositionOutOfRange(Position),

    #[error("ill-formed rule `{rule}`: {reason}")]
    IllFormedRule { rule: String, reason: String },

    #[error("unknown rule `{0}`")]
    UnknownRule(String),

    #[error("TRS is not left-linear (rule `{0}`)")]
    NotLeftLinear(String),

    #[error("TRS is not weakly orthogonal: {0}")]
    NotWeaklyOrthogonal(String),

    #[error("collapsing rules present ({}); confluence requires collapse-freeness", .0.join(", "))]
    CollapsingRules(Vec<String>),

    #[error("no redex of rule `{rule}` at position {position}")]
    NotARedex { position: Position, rule: String },

    #[error("invalid parallel step: {0}")]
    InvalidParallelStep(String),

    #[error("invalid development: {0}")]
    InvalidDevelopment(String),

    #[error("projection requires an orthogonal pair: {0}")]
    NotOrthogonal(String),

    #[error("depth budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("convergence modulus unavailable: {0}")]
    ModulusUnavailable(String),

    #[error("divergence witness unavailable: {0}")]
    WitnessUnavailable(String),

    #[error("insufficient height: {0}")]
    InsufficientHeight(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }
}
