use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GeomError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown identifier `{name}` at line {line}, column {column}")]
    UnknownIdentifier {
        name: String,
        line: usize,
        column: usize,
    },

    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },

    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("point {coords:?} is not strictly inside chart `{chart}`")]
    OutOfBounds { chart: String, coords: Vec<f64> },

    #[error("finite-difference stencil of radius {radius} around {coords:?} leaves the chart")]
    StencilOutsideBounds { coords: Vec<f64>, radius: f64 },

    #[error("singular metric: pivot magnitude {pivot:e} below threshold")]
    SingularMetric { pivot: f64 },

    #[error("metric signature mismatch: expected {expected}, eigenvalues {eigenvalues:?}")]
    Signature {
        expected: &'static str,
        eigenvalues: Vec<f64>,
    },

    #[error("degenerate plane: |Gram determinant| = {gram:e}")]
    DegeneratePlane { gram: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid tensor field: {0}")]
    InvalidTensor(String),

    #[error("invalid alpha family: {0}")]
    InvalidAlpha(String),

    #[error("positivity band violated at {point:?}: smallest eigenvalue {eigenvalue:e}")]
    Positivity { point: Vec<f64>, eigenvalue: f64 },

    #[error("point {coords:?} is off the rho = 0 slice")]
    OffSlice { coords: Vec<f64> },

    #[error("hypothesis `{hypothesis}` violated: worst defect {defect:e} at {location:?}")]
    Hypothesis {
        hypothesis: String,
        defect: f64,
        location: Vec<f64>,
    },
}

pub type Result<T, E = GeomError> = std::result::Result<T, E>;
