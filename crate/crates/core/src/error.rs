use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain")]
    Domain { point: Vec<f64> },

    #[error("point {point:?} lies on the coordinate-singular locus {locus}")]
    Singularity { point: Vec<f64>, locus: String },

    #[error("scenario definition error: {0}")]
    ScenarioDefinition(String),

    #[error("automatic differentiation capability exhausted: order {requested} requested, maximum {max}")]
    Capability { requested: usize, max: usize },

    #[error("precondition violated: {message}")]
    Precondition { message: String, residual: Option<f64> },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("scenario inconsistency: {0}")]
    ScenarioInconsistency(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("degenerate fixed component {id}: |Pf| = {modulus:e}")]
    DegenerateComponent { id: String, modulus: f64 },

    #[error("frame or moment definition error: {0}")]
    Frame(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation failed: {invariant} (residual {residual:e}, tolerance {tolerance:e})")]
    Validation { invariant: String, residual: f64, tolerance: f64 },

    #[error("scenario not found: {0}")]
    ScenarioNotFound(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn precondition(message: impl Into<String>) -> Error {
        Error::Precondition { message: message.into(), residual: None }
    }

    pub fn precondition_with(message: impl Into<String>, residual: f64) -> Error {
        Error::Precondition { message: message.into(), residual: Some(residual) }
    }

    /// Short machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Singularity { .. } => "singularity",
            Error::ScenarioDefinition(_) => "scenario-definition",
            Error::Capability { .. } => "capability",
            Error::Precondition { .. } => "precondition",
            Error::Argument(_) => "argument",
            Error::ScenarioInconsistency(_) => "scenario-inconsistency",
            Error::Integration(_) => "integration",
            Error::DegenerateComponent { .. } => "degenerate-component",
            Error::Frame(_) => "frame",
            Error::Parse(_) => "parse",
            Error::Validation { .. } => "validation",
            Error::ScenarioNotFound(_) => "scenario-not-found",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
