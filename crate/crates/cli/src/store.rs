use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use orbit_census::solver::DatabaseMeta;
use orbit_census::{BilliardTable, GeometryError, OrbitDatabase, SolverError};

use crate::exit::{Failure, ResultExt, ASSUMPTIONS, FINGERPRINT, PARSE};

/// `<path>.<suffix>`, keeping the original extension.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut name: OsString = path.as_os_str().to_owned();
    name.push(".");
    name.push(suffix);
    PathBuf::from(name)
}

pub fn meta_path(db: &Path) -> PathBuf {
    sidecar(db, "meta.toml")
}

pub fn failures_path(db: &Path) -> PathBuf {
    sidecar(db, "failures")
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let run = || -> anyhow::Result<()> {
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    run()
        .with_context(|| format!("writing {}", path.display()))
        .code(PARSE)
}

/// Write to `out`, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn load_table(path: &Path) -> Result<BilliardTable, Failure> {
    BilliardTable::from_path(path).map_err(|e| {
        let code = match e {
            GeometryError::Assumptions(_) => ASSUMPTIONS,
            _ => PARSE,
        };
        Failure::new(code, anyhow::Error::new(e))
    })
}

pub fn load_valid_table(path: &Path) -> Result<BilliardTable, Failure> {
    let table = load_table(path)?;
    table.ensure_valid().code(ASSUMPTIONS)?;
    Ok(table)
}

/// Read a database and its metadata, rejecting it if it was built for
/// another table.
pub fn load_database(db: &Path, table: &BilliardTable) -> Result<OrbitDatabase, Failure> {
    let meta_file = meta_path(db);
    let meta_text = std::fs::read_to_string(&meta_file)
        .with_context(|| format!("reading {}", meta_file.display()))
        .code(PARSE)?;
    let meta = DatabaseMeta::from_toml_str(&meta_text).code(PARSE)?;
    if meta.table_fingerprint != table.fingerprint() {
        return Err(Failure::new(
            FINGERPRINT,
            anyhow::anyhow!(
                "database {} was built for table {}, not {}",
                db.display(),
                meta.table_fingerprint,
                table.fingerprint()
            ),
        ));
    }
    let text = std::fs::read_to_string(db)
        .with_context(|| format!("reading {}", db.display()))
        .code(PARSE)?;
    OrbitDatabase::from_csv_str(&text, meta, table).map_err(|e| {
        let code = match e {
            SolverError::Csv { .. } | SolverError::BadInput(_) => PARSE,
            _ => ASSUMPTIONS,
        };
        Failure::new(code, anyhow::Error::new(e).context(format!("loading {}", db.display())))
    })
}
