use thiserror::Error;

/// Errors raised by grid construction, quadrature, assembly and the studies.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gamma must lie in [0, 1), got {0}")]
    InvalidGamma(f64),

    #[error("interval must satisfy a < b, got ({a}, {b})")]
    InvalidInterval { a: f64, b: f64 },

    #[error("cell count {n} outside supported range [{min}, {max}]")]
    CellCount { n: usize, min: usize, max: usize },

    #[error("point {x} is not inside the open interval ({a}, {b})")]
    PointOutside { x: f64, a: f64, b: f64 },

    #[error("index {index} outside [{min}, {max}]")]
    IndexOutOfRange { index: usize, min: usize, max: usize },

    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("tolerance {0} below the supported minimum 1e-14")]
    InvalidTolerance(f64),

    #[error("singular integral at x = {x} did not converge with {nodes} nodes per side")]
    OracleNonConvergence { x: f64, nodes: usize },

    #[error("Gauss-Jacobi ({quadrature}) and series ({series}) disagree at x = {x}")]
    OracleMismatch { x: f64, quadrature: f64, series: f64 },

    #[error("monomial degree {0} exceeds the supported maximum 4")]
    MonomialDegree(u32),

    #[error("pivot {pivot:e} in column {column} underflows; the matrix is numerically singular")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("system does not match the requested scheme: {0}")]
    SchemeMismatch(&'static str),

    #[error("invalid study configuration: {0}")]
    InvalidStudy(String),

    #[error("malformed table: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
