use thiserror::Error;

/// Errors raised by tableau validation, stepping, the oracle, and the controller.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "tableau `{name}` is not explicit: a[{row}][{col}] = {value} (row <= col must be zero)"
    )]
    ExplicitnessViolation {
        name: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("tableau `{name}` fails {condition}: residual {residual:e}")]
    ConsistencyViolation {
        name: String,
        condition: &'static str,
        residual: f64,
    },

    #[error("tableau `{name}` has inconsistent dimensions: {detail}")]
    DimensionMismatch { name: String, detail: String },

    #[error("method pair needs higher order > lower order, got {lower} and {higher}")]
    InvalidPair { lower: u32, higher: u32 },

    #[error("stage {stage} evaluated to a non-finite value at x = {x}")]
    NonFiniteStage { stage: usize, x: f64 },

    #[error("state became non-finite at x = {x}")]
    NonFiniteState { x: f64 },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown method pair `{0}`")]
    UnknownPair(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("reference solution did not converge after {halvings} halvings (last change {last_change:e})")]
    OracleDivergence { halvings: u32, last_change: f64 },

    #[error("h^{power} underflows to zero for h = {h:e}")]
    StepUnderflow { h: f64, power: u32 },

    #[error("order fit is degenerate: error {error:e} at h = {h:e} is at roundoff level")]
    DegenerateFit { h: f64, error: f64 },

    #[error("invalid fit input: {0}")]
    InvalidFit(String),

    #[error("invalid controller configuration: {0}")]
    InvalidConfig(String),

    #[error("required stepsize {required:e} is below h_min = {h_min:e} at x = {x}")]
    StepsizeUnderflow { x: f64, required: f64, h_min: f64 },

    #[error("exceeded {max_steps} accepted steps before reaching x_end (x = {x})")]
    MaxStepsExceeded { max_steps: usize, x: f64 },

    #[error("exceeded {max_rejects} consecutive rejections at x = {x}")]
    MaxRejectsExceeded { max_rejects: usize, x: f64 },

    #[error("trace has no oracle diagnostics (problem `{0}` has no exact solution)")]
    MissingDiagnostics(String),
}

pub type Result<T> = std::result::Result<T, Error>;
