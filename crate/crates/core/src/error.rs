use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid sector angles: {0}")]
    InvalidSectorAngles(String),
    #[error("invalid angle: {0}")]
    InvalidAngle(String),
    #[error("operation not defined for this vertex class: {0}")]
    WrongClass(String),
    #[error("driving angle {value} rad outside the fold interval [{lo}, {hi}]")]
    OutOfDomain { value: f64, lo: f64, hi: f64 },
    #[error("vertex ({row}, {col}) cannot take fold angle {value} rad on crease {slot}")]
    VertexOutOfDomain { row: usize, col: usize, slot: usize, value: f64 },
    #[error("degenerate vertex: {0}")]
    DegenerateVertex(String),
    #[error("configuration not determined by the driving crease: {0}")]
    Underdetermined(String),
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error("invalid unit: {0}")]
    InvalidUnit(String),
    #[error("unit failed validation: {0}")]
    ValidationFailed(String),
    #[error("fold angle {crease} not monotone between samples {i} and {j}")]
    MonotonicityViolation { crease: usize, i: usize, j: usize },
    #[error("design has negative degrees of freedom ({0})")]
    NegativeDof(i64),
    #[error("empty fold interval: {0}")]
    EmptyInterval(String),
    #[error("incompatible units: {0}")]
    IncompatibleUnits(String),
    #[error("layout failure: {0}")]
    LayoutFailure(String),
    #[error("propagation conflict: {0}")]
    PropagationConflict(String),
    #[error("not a grid-structured blanket: {0}")]
    NotABlanket(String),
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("inconsistent fold angles around a vertex or panel loop: {0}")]
    ClosureViolation(String),
    #[error("panel deformed in folded state: {0}")]
    RigidityViolation(String),
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
