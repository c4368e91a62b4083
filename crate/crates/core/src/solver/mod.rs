//! Periodic orbits from cyclic words: a damped Newton solve of the length
//! functional, verification by re-tracing, and orbit databases.

pub mod database;
pub mod length;
pub mod orbit;
pub mod shadowing;

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::geometry::GeometryError;
use crate::symbolic::{Letter, SymbolicError};

pub use database::{build_database, BuildOutcome, DatabaseMeta, OrbitDatabase, WordFailure};
pub use length::{length_functional, length_only, CyclicHessian, LengthEval};
pub use orbit::{
    iterate_stability, orbit_stability, solve_cycle, solve_letters, solve_orbit, verify_orbit,
    PeriodicOrbit, SolveOptions, VerifyReport,
};
pub use shadowing::{concat_defect, shadowing_family, shadowing_rate, ShadowingFit, ShadowingPair};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("segment {segment} has zero length")]
    Degenerate { segment: usize },
    #[error("word {0} is not primitive")]
    NotPrimitive(String),
    #[error("no convergence for word {word} (residual {residual:e})")]
    NonConvergence { word: String, residual: f64 },
    #[error("orbit {word}: segment {segment} meets obstacle {obstacle} (margin {margin:e})")]
    SegmentPenetration {
        word: String,
        segment: usize,
        obstacle: Letter,
        margin: f64,
    },
    #[error("orbit {word} failed verification: {detail}")]
    Verification { word: String, detail: String },
    #[error("line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error("shadowing family: {0}")]
    InsufficientFamily(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
