//! Deduplicated store of solved primitive orbits, keyed by canonical word.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::orbit::{solve_orbit, verify_orbit, PeriodicOrbit, SolveOptions, FLIGHT_TOL};
use super::SolverError;
use crate::geometry::BilliardTable;
use crate::symbolic::{
    canonicalize, enumerate_words, format_letters, parse_letters, Alphabet, Letter, ZeroFilter,
};

pub const CSV_HEADER: &str = "word;n_letters;zeros;tau;tau_sharp;angles;grad_residual;closure_residual;min_segment;max_segment;monodromy_trace";

/// Everything needed to reproduce a database, stored next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatabaseMeta {
    pub table_fingerprint: String,
    pub max_word_len: usize,
    pub zeros: String,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl DatabaseMeta {
    pub fn zero_filter(&self) -> Result<ZeroFilter, SolverError> {
        Ok(self.zeros.parse()?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("metadata serializes")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SolverError> {
        toml::from_str(text).map_err(|e| SolverError::BadInput(format!("database metadata: {e}")))
    }
}

#[derive(Debug, Clone)]
pub struct WordFailure {
    pub word: String,
    pub error: String,
}

#[derive(Debug, Clone)]
pub struct OrbitDatabase {
    pub meta: DatabaseMeta,
    records: BTreeMap<(usize, Vec<Letter>), PeriodicOrbit>,
}

impl OrbitDatabase {
    pub fn new(meta: DatabaseMeta) -> Self {
        Self {
            meta,
            records: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, orbit: PeriodicOrbit) -> Option<PeriodicOrbit> {
        let key = (orbit.word.len(), orbit.word.letters().to_vec());
        self.records.insert(key, orbit)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records sorted by (word length, word).
    pub fn orbits(&self) -> impl Iterator<Item = &PeriodicOrbit> {
        self.records.values()
    }

    pub fn get(&self, letters: &[Letter]) -> Option<&PeriodicOrbit> {
        let word = canonicalize(letters).ok()?;
        self.records.get(&(word.len(), word.letters().to_vec()))
    }

    pub fn count_by_length(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for (len, _) in self.records.keys() {
            *out.entry(*len).or_insert(0) += 1;
        }
        out
    }

    pub fn zero_filter(&self) -> ZeroFilter {
        self.meta.zero_filter().unwrap_or_default()
    }

    /// Smallest possible segment length for orbits this database may hold.
    pub fn min_segment_bound(&self, table: &BilliardTable) -> f64 {
        let zero_free = !table.has_distinguished() || self.zero_filter() == ZeroFilter::Exactly(0);
        table.min_gap(zero_free)
    }

    /// Periods strictly below this value are complete: every orbit with more
    /// letters than `max_word_len` is longer.
    pub fn certified_t_max(&self, table: &BilliardTable) -> f64 {
        (self.meta.max_word_len as f64 + 1.0) * self.min_segment_bound(table)
    }

    /// Largest segment length among stored orbits.
    pub fn observed_segment_range(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for o in self.orbits() {
            lo = lo.min(o.min_segment());
            hi = hi.max(o.max_segment());
        }
        (!self.is_empty()).then_some((lo, hi))
    }

    pub fn check_fingerprint(&self, table: &BilliardTable) -> Result<(), SolverError> {
        let fp = table.fingerprint();
        if fp != self.meta.table_fingerprint {
            return Err(SolverError::BadInput(format!(
                "database fingerprint {} does not match table {}",
                self.meta.table_fingerprint, fp
            )));
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 + 160 * self.len());
        out.push_str(CSV_HEADER);
        out.push('\n');
        for o in self.orbits() {
            let angles: Vec<String> = o.angles.iter().map(|a| fmt_f64(*a)).collect();
            writeln!(
                out,
                "{};{};{};{};{};{};{};{};{};{};{}",
                o.word,
                o.word.len(),
                o.zeros,
                fmt_f64(o.tau),
                fmt_f64(o.tau_sharp),
                angles.join(","),
                fmt_f64(o.grad_residual),
                fmt_f64(o.closure_residual),
                fmt_f64(o.min_segment()),
                fmt_f64(o.max_segment()),
                fmt_f64(o.stability.monodromy_trace),
            )
            .expect("writing to a string");
        }
        out
    }

    /// Parse a CSV written by [`Self::to_csv_string`], rebuilding every orbit
    /// from its angles and checking the stored period against the table.
    pub fn from_csv_str(
        text: &str,
        meta: DatabaseMeta,
        table: &BilliardTable,
    ) -> Result<Self, SolverError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == CSV_HEADER => {}
            _ => {
                return Err(SolverError::Csv {
                    line: 1,
                    msg: "missing or wrong header".into(),
                })
            }
        }
        let mut db = Self::new(meta);
        for (i, line) in lines {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| SolverError::Csv { line: line_no, msg };
            let fields: Vec<&str> = line.split(';').collect();
            if fields.len() != 11 {
                return Err(err(format!("expected 11 fields, got {}", fields.len())));
            }
            let num = |k: usize| -> Result<f64, SolverError> {
                fields[k]
                    .parse::<f64>()
                    .map_err(|_| err(format!("field {k} is not a number: {:?}", fields[k])))
            };
            let letters = parse_letters(fields[0]).map_err(|e| err(e.to_string()))?;
            let word = canonicalize(&letters).map_err(|e| err(e.to_string()))?;
            if word.letters() != letters.as_slice() || !word.is_primitive() {
                return Err(err(format!("{} is not a canonical primitive word", fields[0])));
            }
            let angles = fields[5]
                .split(',')
                .map(|a| a.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| err("bad angle list".into()))?;
            if angles.len() != word.len() {
                return Err(err("angle count differs from word length".into()));
            }
            let tau = num(3)?;
            let mut orbit = PeriodicOrbit::from_angles(word, angles, num(6)?, table)
                .map_err(|e| err(e.to_string()))?;
            orbit.closure_residual = num(7)?;
            if (orbit.tau - tau).abs() > FLIGHT_TOL {
                return Err(err(format!(
                    "stored period {tau} differs from recomputed {}",
                    orbit.tau
                )));
            }
            if db.insert(orbit).is_some() {
                return Err(err(format!("duplicate word {}", fields[0])));
            }
        }
        Ok(db)
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Outcome of a database build: the database plus words that failed to solve.
#[derive(Debug)]
pub struct BuildOutcome {
    pub database: OrbitDatabase,
    pub failures: Vec<WordFailure>,
}

/// Solve every canonical primitive word of length `2..=max_word_len` admitted
/// by `zeros`. The result is independent of `threads`.
///
/// A segment crossing an obstacle aborts the whole build, since it means the
/// table violates the standing assumptions.
pub fn build_database(
    table: &BilliardTable,
    max_word_len: usize,
    zeros: ZeroFilter,
    opts: &SolveOptions,
    threads: Option<usize>,
) -> Result<BuildOutcome, SolverError> {
    table.ensure_valid()?;
    let alphabet = Alphabet::new(table.first_letter(), table.last_letter());
    let words: Vec<_> = (2..=max_word_len)
        .flat_map(|n| enumerate_words(alphabet, n, zeros, true))
        .collect();
    let solve_all = || {
        words
            .par_iter()
            .map(|w| (w, solve_orbit(w, table, opts)))
            .collect::<Vec<_>>()
    };
    let results = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| SolverError::BadInput(format!("thread pool: {e}")))?
            .install(solve_all),
        None => solve_all(),
    };
    let meta = DatabaseMeta {
        table_fingerprint: table.fingerprint(),
        max_word_len,
        zeros: zeros.to_string(),
        tol: opts.tol,
        max_iter: opts.max_iter,
        seed: opts.seed,
    };
    let mut database = OrbitDatabase::new(meta);
    let mut failures = Vec::new();
    for (word, result) in results {
        match result {
            Ok(orbit) => {
                database.insert(orbit);
            }
            Err(e @ SolverError::SegmentPenetration { .. }) => return Err(e),
            Err(e) => failures.push(WordFailure {
                word: word.to_string(),
                error: e.to_string(),
            }),
        }
    }
    Ok(BuildOutcome { database, failures })
}

/// Re-verify every stored orbit against the billiard map.
pub fn verify_database(db: &OrbitDatabase, table: &BilliardTable) -> Vec<WordFailure> {
    db.orbits()
        .filter_map(|o| {
            let report = verify_orbit(o, table);
            (!report.ok).then(|| WordFailure {
                word: format_letters(o.letters()),
                error: report.detail.unwrap_or_default(),
            })
        })
        .collect()
}
