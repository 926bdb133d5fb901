use thiserror::Error;

use crate::ast::Participant;
use crate::syntax::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),

    #[error("participant {0} interacts with itself")]
    SelfInteraction(Participant),

    #[error("control point invariant violated: {0}")]
    ControlPoints(String),

    #[error("syntax error at {span}: {message}")]
    Syntax { span: SourceSpan, message: String },

    #[error("subject and action are undefined on control-point events ({0})")]
    UndefinedOnControlPoint(String),

    #[error("sequential composition of hypergraphs sharing events ({0})")]
    UniverseOverlap(String),

    #[error("semantics undefined: {0}")]
    SemanticsUndefined(String),

    #[error("invalid reflection: {0}")]
    InvalidReflection(String),

    #[error("incomplete resolution: no branch selected for choice {0}")]
    IncompleteResolution(String),

    #[error("union of machines with different initial states ({0} vs {1})")]
    InitialMismatch(String, String),

    #[error("product of machines with overlapping states ({0})")]
    StateOverlap(String),

    #[error("invalid communicating system: {0}")]
    InvalidSystem(String),

    #[error("machine has a cycle and no length bound was given")]
    CycleWithoutBound,

    #[error("exploration budget exceeded after {explored} configurations")]
    BudgetExceeded { explored: usize },

    #[error("more than {limit} communication events in one resolution")]
    TooManyEvents { limit: usize },

    #[error("no well-formed choreography found after {attempts} attempts")]
    GenerationExhausted { attempts: usize },

    #[error("internal check disagrees with the exhaustive oracle: {0}")]
    OracleMismatch(String),

    #[error("cannot parse word: {0}")]
    InvalidWord(String),

    #[error("invalid expectation sidecar: {0}")]
    InvalidSidecar(String),
}

pub type Result<T> = std::result::Result<T, Error>;
