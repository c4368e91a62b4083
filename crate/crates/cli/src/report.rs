//! Summary of a database: entropy of the zero-free sub-billiard, growth
//! constants, a-priori bound ratios and the weighted-count comparison.

use orbit_census::counting::{
    block_means, certified_grid, check_apriori, compare_weighted, count_curves, fit_growth,
    DEFAULT_APRIORI_BOUND,
};
use orbit_census::spectral::{entropy_estimate, CutoffWindow, EntropyMethod, OrbitSet};
use orbit_census::{BilliardTable, OrbitDatabase};
use serde::Serialize;

use crate::exit::Failure;

pub struct ReportOptions {
    pub n_max: usize,
    pub points: usize,
    pub t0: f64,
    pub window: Option<CutoffWindow>,
    pub shrink: f64,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    /// Sections that could not be computed, with the reason.
    pub skipped: Vec<String>,
    pub seed: u64,
    pub table: TableSection,
    pub database: DatabaseSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth: Option<GrowthSection>,
    pub apriori: Vec<AprioriRow>,
    pub weighted: Vec<WeightedRow>,
}

#[derive(Debug, Serialize)]
pub struct TableSection {
    pub fingerprint: String,
    pub obstacles: usize,
    pub min_gap: f64,
    pub min_eclipse_margin: f64,
    pub min_center_hull_distance: f64,
}

#[derive(Debug, Serialize)]
pub struct DatabaseSection {
    pub records: usize,
    pub max_word_len: usize,
    pub zeros: String,
    pub certified_t: f64,
}

#[derive(Debug, Serialize)]
pub struct EntropySection {
    pub h_hat: f64,
    pub pressure: Option<f64>,
    pub regression: Option<f64>,
    pub discrepancy: Option<f64>,
    pub regression_window: Option<(f64, f64)>,
    /// `[log 2 / ℓ_max, log 2 / ℓ_min]` from observed zero-free segments.
    pub sandwich: Option<(f64, f64)>,
    pub pressure_roots: Vec<(usize, f64)>,
}

#[derive(Debug, Serialize)]
pub struct GrowthSection {
    pub h_hat: f64,
    pub c_hat: f64,
    pub c_spread: f64,
    pub fit_window: (f64, f64),
    pub c_per_n: Vec<(usize, f64)>,
}

#[derive(Debug, Serialize)]
pub struct AprioriRow {
    pub n: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub ratio: f64,
    pub bound: f64,
    pub verdict: String,
}

#[derive(Debug, Serialize)]
pub struct WeightedRow {
    pub n: usize,
    pub t0: f64,
    pub count: u64,
    pub short_count: u64,
    pub final_deficit: Option<f64>,
    pub block_deficits: Vec<f64>,
    pub census_slope: Option<f64>,
}

fn zero_free_sandwich(db: &OrbitDatabase) -> Option<(f64, f64)> {
    let (lo, hi) = db
        .orbits()
        .filter(|o| o.zeros == 0)
        .fold((f64::INFINITY, 0.0f64), |(a, b), o| (a.min(o.min_segment()), b.max(o.max_segment())));
    (hi > 0.0).then(|| (2f64.ln() / hi, 2f64.ln() / lo))
}

pub fn build(db: &OrbitDatabase, table: &BilliardTable, opts: &ReportOptions) -> Result<Report, Failure> {
    let v = table.validation();
    let set = OrbitSet::from_database(db, table);
    let mut skipped = Vec::new();

    let entropy = match entropy_estimate(&set.zero_free(table), EntropyMethod::Both) {
        Ok(e) => Some(EntropySection {
            h_hat: e.h_hat,
            pressure: e.pressure,
            regression: e.regression,
            discrepancy: e.discrepancy,
            regression_window: e.regression_window,
            sandwich: zero_free_sandwich(db),
            pressure_roots: e.pressure_roots,
        }),
        Err(e) => {
            skipped.push(format!("entropy: {e}"));
            None
        }
    };

    let mut growth = None;
    let mut apriori = Vec::new();
    let mut weighted = Vec::new();
    if table.has_distinguished() {
        let grid = certified_grid(&set, opts.points);
        let mut curves = Vec::new();
        for n in 1..=opts.n_max {
            match count_curves(&set, n, &grid, None) {
                Ok(c) => curves.push(c),
                Err(e) => skipped.push(format!("counts n = {n}: {e}")),
            }
        }
        match fit_growth(&curves, entropy.as_ref().map(|e| e.h_hat), None) {
            Ok(fit) => {
                for c in &curves {
                    let a = check_apriori(c, fit.h_hat, DEFAULT_APRIORI_BOUND);
                    apriori.push(AprioriRow {
                        n: a.n,
                        q_min: a.q_min,
                        q_max: a.q_max,
                        ratio: a.ratio,
                        bound: a.bound,
                        verdict: format!("{:?}", a.verdict).to_lowercase(),
                    });
                }
                growth = Some(GrowthSection {
                    h_hat: fit.h_hat,
                    c_hat: fit.c_hat,
                    c_spread: fit.c_spread,
                    fit_window: fit.fit_window,
                    c_per_n: fit.c_per_n,
                });
            }
            Err(e) => skipped.push(format!("growth fit: {e}")),
        }
        let window = opts.window.clone().or_else(|| set.box_window(opts.shrink));
        match window {
            Some(w) => {
                for c in &curves {
                    let r = compare_weighted(&set, c.n, &grid, &w, opts.t0)?;
                    weighted.push(WeightedRow {
                        n: c.n,
                        t0: opts.t0,
                        count: *r.counts.last().unwrap_or(&0),
                        short_count: *r.short_counts.last().unwrap_or(&0),
                        final_deficit: r.deficit.last().copied().flatten(),
                        block_deficits: block_means(&r.deficit, 8).into_iter().flatten().collect(),
                        census_slope: c.top_decade().and_then(|d| r.census_slope(d)),
                    });
                }
            }
            None => skipped.push("weighted counts: no bounces on obstacle 0".into()),
        }
    } else {
        skipped.push("counting: table has no obstacle 0".into());
    }

    Ok(Report {
        skipped,
        seed: opts.seed,
        table: TableSection {
            fingerprint: table.fingerprint(),
            obstacles: table.obstacles().len(),
            min_gap: v.min_gap,
            min_eclipse_margin: v.min_eclipse_margin,
            min_center_hull_distance: v.min_center_hull_distance,
        },
        database: DatabaseSection {
            records: db.len(),
            max_word_len: db.meta.max_word_len,
            zeros: db.meta.zeros.clone(),
            certified_t: set.certified_t,
        },
        entropy,
        growth,
        apriori,
        weighted,
    })
}
