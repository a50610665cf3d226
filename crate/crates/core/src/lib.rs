//! Product-integration collocation for weakly singular integrals
//! `int_a^b u(y) |x - y|^(-gamma) dy` and the nonlocal problem
//! `int_a^b (u(x) - u(y)) |x - y|^(-gamma) dy = f(x)` with Dirichlet data.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `f64` instantiations used by the studies are re-exported as aliases.

pub mod coeffs;
pub mod error;
pub mod grid;
pub mod jacobi;
pub mod moments;
pub mod oracle;
pub mod plc;
pub mod pqc;
pub mod scalar;
pub mod solver;
pub mod study;
pub mod system;

pub use error::{Error, Result};
pub use grid::{KernelParams, NodeSet, UniformGrid, MAX_CELLS};
pub use scalar::Scalar;
pub use study::{
    emit_table, parse_table, run_global_study, run_study, run_truncation_study, EvalPoint,
    ReportRow, StudyMode, StudyReport, TableFormat,
};
pub use system::Scheme;

pub type Grid = UniformGrid<f64>;
pub type Kernel = KernelParams<f64>;
pub type PlcTable = coeffs::PlcCoeffs<f64>;
pub type PqcTable = coeffs::PqcCoeffs<f64>;
pub type System = system::CollocationSystem<f64>;
pub type Matrix = solver::DenseMatrix<f64>;
pub type Problem = oracle::ManufacturedProblem<f64>;
pub type Function = oracle::TestFunction<f64>;
pub type Config = study::StudyConfig<f64>;
