//! Periodic-orbit census for planar dispersive billiards.
//!
//! The pipeline runs from a table of disk obstacles ([`geometry`]) through
//! symbolic words ([`symbolic`]) to solved periodic orbits ([`solver`]), and
//! from there to orbit-sum series ([`spectral`]) and counting functions
//! ([`counting`]).

pub mod counting;
pub mod dynamics;
pub mod geometry;
pub mod solver;
pub mod spectral;
pub mod symbolic;

pub use geometry::{BilliardTable, Disk, GeometryError, ValidationReport};
pub use solver::{OrbitDatabase, PeriodicOrbit, SolveOptions, SolverError};
pub use symbolic::{CyclicWord, Letter, ZeroFilter};
