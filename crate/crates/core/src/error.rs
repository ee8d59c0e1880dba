use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SymError {
    #[error("unbound symbol `{0}` in evaluation")]
    UnboundSymbol(String),
    #[error("symbol `{0}` bound to zero occurs with a negative exponent")]
    ZeroToNegativePower(String),
    #[error("symbol `{0}` occurs with a negative exponent; polynomial substitution undefined")]
    NegativePowerSubstitution(String),
}

#[derive(Error, Debug)]
pub enum ReductionError {
    #[error("quadratic form is not geometrisable; violated constraints: {0:?}")]
    ClassificationFailed(Vec<String>),
    #[error("order reduction left a second-order term: {0}")]
    OrderNotReduced(String),
    #[error("coefficient does not factor through the analytic fibration: {0}")]
    NotAPushforward(String),
    #[error("operator has order {0} > 1; pushforward requires order <= 1")]
    OrderTooHigh(u32),
    #[error(transparent)]
    Sym(#[from] SymError),
}

#[derive(Error, Debug)]
pub enum NumericError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("shift {0} is not an integer multiple of the grid step")]
    NonAlignedShift(f64),
    #[error("operator uses axis {0} not present in the data")]
    AxisMismatch(&'static str),
    #[error("singular point at grid node {0:?}: {1}")]
    SingularPoint(Vec<usize>, String),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error(transparent)]
    Sym(#[from] SymError),
}
