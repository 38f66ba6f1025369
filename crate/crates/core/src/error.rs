use thiserror::Error;

/// Violations of the network model's invariants.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("pipe type catalog is empty")]
    EmptyCatalog,
    #[error("pipe type {index}: {reason}")]
    InvalidPipeType { index: usize, reason: String },
    #[error("pipe type catalog is not sorted by {field} at type {index}")]
    UnsortedCatalog { index: usize, field: &'static str },
    #[error("duplicate id {0:?}")]
    DuplicateId(String),
    #[error("pipe {pipe:?}: {reason}")]
    InvalidPipe { pipe: String, reason: String },
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("unknown demand pattern {0:?}")]
    UnknownPattern(String),
    #[error("period {period} outside the horizon 1..={count}")]
    PeriodOutOfRange { period: usize, count: usize },
    #[error("network has no reservoir")]
    NoReservoir,
    #[error("network is not connected")]
    Disconnected,
    #[error("solution covers {found} pipes, network has {expected}")]
    IncompleteSolution { expected: usize, found: usize },
    #[error("pipe {pipe:?} has type {index}, catalog has types 1..={max}")]
    TypeOutOfRange { pipe: String, index: usize, max: usize },
    #[error("meshedness needs at least 3 nodes, network has {0}")]
    MeshednessUndefined(usize),
}

/// Error while reading an instance, catalog or solution file. Carries the
/// 1-based line number of the offending record when there is one.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("{}{message}", location(*.line))]
pub struct ParseError {
    pub line: Option<usize>,
    pub message: String,
}

fn location(line: Option<usize>) -> String {
    match line {
        Some(l) => format!("line {l}: "),
        None => String::new(),
    }
}

impl ParseError {
    pub fn at(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl From<ModelError> for ParseError {
    fn from(e: ModelError) -> Self {
        Self::new(e.to_string())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HydraulicError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("junction {0:?} is not connected to any reservoir")]
    Unsupplied(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no feasible solution exists using the same type for all pipes")]
    NoFeasibleUniform,
    #[error("no feasible assignment exists")]
    Infeasible,
    #[error("search space of {size} configurations exceeds the limit of {limit}")]
    TooLarge { size: f64, limit: u64 },
    #[error(transparent)]
    Hydraulic(#[from] HydraulicError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
