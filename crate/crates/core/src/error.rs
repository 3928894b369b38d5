use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("variable {var} is not positive under {binder}")]
    NotPositive { var: String, binder: &'static str },
    #[error("variable {0} is not positive")]
    NotPositiveVar(String),
    #[error("fixed-point binders are not accepted here")]
    FixpointInProver,
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("variable {0} is not strongly positive")]
    NotStronglyPositive(String),
    #[error("variable {0} does not occur")]
    VarAbsent(String),
    #[error("formula is not disjunctive in {0}")]
    NotDisjunctive(String),
    #[error("formula is not weakly negative in {0}")]
    NotWeaklyNegative(String),
    #[error("invalid poset: {0}")]
    InvalidPoset(String),
    #[error("Heyting law violated: {0}")]
    AlgebraLaw(String),
    #[error("no stabilization within cap {0}")]
    CapExceeded(usize),
    #[error("bound {rule} = {bound} violated by computed value {value}")]
    BoundViolation {
        rule: String,
        bound: usize,
        value: usize,
    },
    #[error("formula outside the word fragment: {0}")]
    OutsideFragment(String),
    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("malformed system: {0}")]
    MalformedSystem(String),
    #[error("verification failed: {0}")]
    VerificationFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
