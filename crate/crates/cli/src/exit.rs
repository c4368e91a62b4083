//! Exit codes: 0 ok, 1 parse, 2 assumptions or solver failure,
//! 3 fingerprint mismatch, 4 completeness violation.

use std::fmt;

use orbit_census::counting::CountingError;
use orbit_census::spectral::SpectralError;
use orbit_census::SolverError;

pub const PARSE: u8 = 1;
pub const ASSUMPTIONS: u8 = 2;
pub const FINGERPRINT: u8 = 3;
pub const INCOMPLETE: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn new(code: u8, error: anyhow::Error) -> Self {
        Self { code, error }
    }

    pub fn msg(code: u8, msg: impl fmt::Display) -> Self {
        Self::new(code, anyhow::anyhow!("{msg}"))
    }
}

pub trait ResultExt<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ResultExt<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure::new(code, e.into()))
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        let code = match e {
            SolverError::BadInput(_)
            | SolverError::Csv { .. }
            | SolverError::Symbolic(_)
            | SolverError::NotPrimitive(_) => PARSE,
            _ => ASSUMPTIONS,
        };
        Self::new(code, e.into())
    }
}

impl From<CountingError> for Failure {
    fn from(e: CountingError) -> Self {
        let code = match e {
            CountingError::Uncertified { .. } | CountingError::Incomplete(_) => INCOMPLETE,
            CountingError::BadInput(_) => PARSE,
            CountingError::Fit(_) => ASSUMPTIONS,
        };
        Self::new(code, e.into())
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        let code = match e {
            SpectralError::Incomplete(_) => INCOMPLETE,
            SpectralError::BadInput(_) => PARSE,
            _ => ASSUMPTIONS,
        };
        Self::new(code, e.into())
    }
}
