use thiserror::Error;

/// Errors raised anywhere in the discretization, solver and analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh needs at least one cell per axis (got {nx}x{ny})")]
    EmptyMesh { nx: usize, ny: usize },
    #[error("invalid domain bounds [{x_min}, {x_max}] x [{y_min}, {y_max}]")]
    InvalidDomain {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
    #[error("cell {0} does not belong to the mesh")]
    UnknownCell(usize),
    #[error("degenerate cell: extents ({0}, {1})")]
    DegenerateCell(f64, f64),

    #[error("{rule} quadrature needs at least {min} points (got {requested})")]
    QuadratureSize {
        rule: &'static str,
        min: usize,
        requested: usize,
    },
    #[error("polynomial degree must be at least {min} (got {degree})")]
    Degree { degree: usize, min: usize },

    #[error("invalid material: {0}")]
    Material(String),
    #[error("normal vector has length {0}, expected 1")]
    NonUnitNormal(f64),

    #[error("consistency parameter must be 1, -1 or 0 (got {0})")]
    ConsistencyParameter(i32),
    #[error("penalty tuning factor must be positive (got {0})")]
    PenaltyFactor(f64),
    #[error("trace operator misuse: {0}")]
    Trace(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("time step must be positive (got {0})")]
    TimeStep(f64),
    #[error("time grid must be strictly increasing with at least two points")]
    TimeGrid,
    #[error("invalid solver configuration: {0}")]
    SolverConfig(String),
    #[error("{method} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("time slab {interval} failed: {source}")]
    Interval {
        interval: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("singular matrix")]
    Singular,

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("dense eigensolver limited to {cap} unknowns (got {size}); reduce the mesh size n")]
    SizeCap { size: usize, cap: usize },
    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("config error: {0}")]
    Config(String),
    #[error("matrix market parse error at line {line}: {msg}")]
    MatrixMarket { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
