//! Orbit sums: the zeta log-derivative, flat traces, weighted `G`-series and
//! pressure-based entropy estimates.
//!
//! Everything here works on an [`OrbitSet`], a flat list of primitive orbit
//! summaries. It can be extracted from a solved database or written by hand,
//! which is how toy examples are built.

pub mod entropy;
pub mod window;

use num_complex::Complex64;
use thiserror::Error;

use crate::dynamics::birkhoff_coords;
use crate::geometry::BilliardTable;
use crate::solver::OrbitDatabase;
use crate::symbolic::ZeroFilter;

pub use entropy::{entropy_estimate, pressure, pressure_root, EntropyEstimate, EntropyMethod};
pub use window::{CutoffWindow, Window, WindowError};

/// Relative width of the transition band of [`OrbitSet::box_window`].
pub const BOX_WINDOW_MARGIN: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("no orbits contribute to the series")]
    Empty,
    #[error("database is incomplete for {0}")]
    Incomplete(String),
    #[error("root of the pressure is not bracketed for N = {0}")]
    NotBracketed(usize),
    #[error("{0}")]
    BadInput(String),
}

/// A primitive orbit reduced to what orbit sums need.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitTerm {
    pub word_len: usize,
    pub zeros: usize,
    pub tau: f64,
    /// Birkhoff coordinates `(s, p)` of the outgoing direction at each bounce
    /// on `D₀`.
    pub d0_coords: Vec<(f64, f64)>,
    /// Flight times between consecutive `D₀` bounces (one per bounce).
    pub d0_intervals: Vec<f64>,
}

impl OrbitTerm {
    /// Summary with no `D₀` geometry, for hand-built examples.
    pub fn toy(word_len: usize, zeros: usize, tau: f64) -> Self {
        Self {
            word_len,
            zeros,
            tau,
            d0_coords: Vec::new(),
            d0_intervals: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrbitSet {
    pub terms: Vec<OrbitTerm>,
    /// Every primitive orbit with at most this many letters is present.
    pub max_word_len: usize,
    pub zero_filter: ZeroFilter,
    /// Periods strictly below this are complete.
    pub certified_t: f64,
    pub d0_circumference: f64,
}

impl OrbitSet {
    /// A hand-built set treated as complete.
    pub fn toy(terms: Vec<OrbitTerm>) -> Self {
        Self {
            terms,
            max_word_len: usize::MAX,
            zero_filter: ZeroFilter::Any,
            certified_t: f64::INFINITY,
            d0_circumference: std::f64::consts::TAU,
        }
    }

    pub fn from_database(db: &OrbitDatabase, table: &BilliardTable) -> Self {
        let d0 = table.has_distinguished().then(|| *table.disk(0));
        let terms = db
            .orbits()
            .map(|o| {
                let d0_coords = match &d0 {
                    Some(disk) => o
                        .distinguished_bounces()
                        .into_iter()
                        .map(|k| birkhoff_coords(&o.phase_point(k, table), disk))
                        .collect(),
                    None => Vec::new(),
                };
                OrbitTerm {
                    word_len: o.word.len(),
                    zeros: o.zeros,
                    tau: o.tau,
                    d0_coords,
                    d0_intervals: if o.zeros > 0 { o.distinguished_intervals() } else { Vec::new() },
                }
            })
            .collect();
        Self {
            terms,
            max_word_len: db.meta.max_word_len,
            zero_filter: db.zero_filter(),
            certified_t: db.certified_t_max(table),
            d0_circumference: d0.map_or(std::f64::consts::TAU, |d| d.circumference()),
        }
    }

    /// Zero-free orbits only, with the certificate recomputed for them.
    pub fn zero_free(&self, table: &BilliardTable) -> Self {
        let gap = table.min_gap(true);
        let certified = if self.zero_filter.admits(0) {
            (self.max_word_len as f64 + 1.0) * gap
        } else {
            0.0
        };
        Self {
            terms: self.terms.iter().filter(|t| t.zeros == 0).cloned().collect(),
            max_word_len: self.max_word_len,
            zero_filter: ZeroFilter::Exactly(0),
            certified_t: certified,
            d0_circumference: self.d0_circumference,
        }
    }

    /// Box `[s_lo, s_hi] × [p_lo, p_hi]` containing every `D₀` bounce.
    pub fn d0_bounce_box(&self) -> Option<(f64, f64, f64, f64)> {
        let mut it = self.terms.iter().flat_map(|t| t.d0_coords.iter().copied());
        let (s0, p0) = it.next()?;
        Some(it.fold((s0, s0, p0, p0), |(a, b, c, d), (s, p)| {
            (a.min(s), b.max(s), c.min(p), d.max(p))
        }))
    }

    /// Window equal to 1 on the bounce box shrunk by `shrink` of its width
    /// on every side (`shrink = 0` covers the whole box).
    pub fn box_window(&self, shrink: f64) -> Option<CutoffWindow> {
        let (s_lo, s_hi, p_lo, p_hi) = self.d0_bounce_box()?;
        let (ds, dp) = (shrink * (s_hi - s_lo), shrink * (p_hi - p_lo));
        Some(CutoffWindow::from_windows(vec![Window::covering(
            s_lo + ds,
            s_hi - ds,
            p_lo + dp,
            p_hi - dp,
            BOX_WINDOW_MARGIN,
        )]))
    }

    pub fn filter_admits_iterates(&self, n: usize) -> bool {
        crate::symbolic::divisors(n).into_iter().all(|d| self.zero_filter.admits(d))
    }
}

/// `I_ρ(γ^k) = (Π_{z ∈ R(γ)} ρ²(z))^k`.
pub fn i_rho(term: &OrbitTerm, k: u32, rho: &CutoffWindow, circumference: f64) -> f64 {
    if rho.constant_one {
        return 1.0;
    }
    let base: f64 = term
        .d0_coords
        .iter()
        .map(|&(s, p)| rho.rho(s, p, circumference).powi(2))
        .product();
    base.powi(k as i32)
}

/// One contribution `weight · e^{−s·tau}` of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTerm {
    pub tau: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesValue {
    pub s: f64,
    pub value: f64,
    pub truncation_tau: f64,
    pub term_count: usize,
    pub tail_estimate: f64,
}

const TAIL_BINS: usize = 20;

/// Terms in a fixed order: ascending period, then weight.
pub fn sorted_terms(mut terms: Vec<SeriesTerm>) -> Vec<SeriesTerm> {
    terms.sort_by(|a, b| a.tau.total_cmp(&b.tau).then(a.weight.total_cmp(&b.weight)));
    terms
}

pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Sum the terms at real `s`, with `prefactor` applied to the total and
/// the tail extrapolated geometrically from the last decade of binned terms.
pub fn evaluate(terms: &[SeriesTerm], s: f64, prefactor: f64, cutoff: f64) -> SeriesValue {
    let values: Vec<f64> = terms.iter().map(|t| t.weight * (-s * t.tau).exp()).collect();
    let value = prefactor * pairwise_sum(&values);
    SeriesValue {
        s,
        value,
        truncation_tau: cutoff,
        term_count: terms.len(),
        tail_estimate: prefactor.abs() * tail_estimate(terms, &values, cutoff),
    }
}

/// Bin the terms into `TAIL_BINS` equal slices of `[τ_min, cutoff]`, fit the
/// geometric ratio between the halves of the last ten bins and extrapolate
/// past the cutoff.
fn tail_estimate(terms: &[SeriesTerm], values: &[f64], cutoff: f64) -> f64 {
    let Some(first) = terms.first() else {
        return 0.0;
    };
    let lo = first.tau;
    let hi = if cutoff.is_finite() {
        cutoff
    } else {
        terms.last().map_or(lo, |t| t.tau)
    };
    if hi <= lo {
        return 0.0;
    }
    let width = (hi - lo) / TAIL_BINS as f64;
    let mut bins = [0.0f64; TAIL_BINS];
    for (t, v) in terms.iter().zip(values) {
        let b = (((t.tau - lo) / width) as usize).min(TAIL_BINS - 1);
        bins[b] += v.abs();
    }
    // Compare the two halves of the last decade; per-bin fits are thrown
    // off by period clusters separated by empty bins.
    let decade = &bins[TAIL_BINS / 2..];
    let half = decade.len() / 2;
    let early: f64 = decade[..half].iter().sum();
    let late: f64 = decade[half..].iter().sum();
    if late == 0.0 {
        return early;
    }
    if early == 0.0 {
        return f64::INFINITY;
    }
    let q = late / early;
    if q >= 1.0 {
        return f64::INFINITY;
    }
    late * q / (1.0 - q)
}

/// Sum the terms at complex `s` in the same order as [`evaluate`].
pub fn evaluate_complex(terms: &[SeriesTerm], s: Complex64, prefactor: Complex64) -> Complex64 {
    let values: Vec<Complex64> = terms
        .iter()
        .map(|t| t.weight * (-s * t.tau).exp())
        .collect();
    let re: Vec<f64> = values.iter().map(|v| v.re).collect();
    let im: Vec<f64> = values.iter().map(|v| v.im).collect();
    prefactor * Complex64::new(pairwise_sum(&re), pairwise_sum(&im))
}

fn check_cutoff(set: &OrbitSet, cutoff: f64) -> Result<(), SpectralError> {
    if !(cutoff > 0.0) {
        return Err(SpectralError::BadInput(format!("cutoff must be positive, got {cutoff}")));
    }
    if cutoff >= set.certified_t {
        return Err(SpectralError::Incomplete(format!(
            "cutoff {cutoff} (certified below {})",
            set.certified_t
        )));
    }
    Ok(())
}

/// Terms of `−∂_s log ζ_B(s) = Σ_γ Σ_{k ≥ 1} τ♯(γ) e^{−s k τ♯(γ)}` over
/// zero-free primitive orbits with `kτ♯ ≤ cutoff`.
pub fn zeta_terms(set: &OrbitSet, cutoff: f64) -> Result<Vec<SeriesTerm>, SpectralError> {
    check_cutoff(set, cutoff)?;
    if !set.zero_filter.admits(0) {
        return Err(SpectralError::Incomplete("zero-free orbits".into()));
    }
    let mut terms = Vec::new();
    for t in set.terms.iter().filter(|t| t.zeros == 0) {
        let mut k = 1.0;
        while k * t.tau <= cutoff {
            terms.push(SeriesTerm { tau: k * t.tau, weight: t.tau });
            k += 1.0;
        }
    }
    if terms.is_empty() {
        return Err(SpectralError::Empty);
    }
    Ok(sorted_terms(terms))
}

pub fn zeta_log_deriv(s: f64, set: &OrbitSet, cutoff: f64) -> Result<SeriesValue, SpectralError> {
    Ok(evaluate(&zeta_terms(set, cutoff)?, s, 1.0, cutoff))
}

/// Terms of the flat trace with `n` bounces on `D₀`: iterates `γ^k` of
/// primitive orbits with `k·r(γ) = n`, weighted `(1/k) I_ρ(γ)^k`.
pub fn flat_trace_terms(
    n: usize,
    set: &OrbitSet,
    rho: &CutoffWindow,
    cutoff: f64,
) -> Result<Vec<SeriesTerm>, SpectralError> {
    check_cutoff(set, cutoff)?;
    if n == 0 {
        return Err(SpectralError::BadInput("n must be at least 1".into()));
    }
    if !set.filter_admits_iterates(n) {
        return Err(SpectralError::Incomplete(format!("orbits with zero counts dividing {n}")));
    }
    let mut terms = Vec::new();
    for t in set.terms.iter().filter(|t| t.zeros > 0 && n % t.zeros == 0) {
        let k = n / t.zeros;
        let tau = k as f64 * t.tau;
        if tau <= cutoff {
            terms.push(SeriesTerm {
                tau,
                weight: i_rho(t, k as u32, rho, set.d0_circumference) / k as f64,
            });
        }
    }
    Ok(sorted_terms(terms))
}

pub fn flat_trace(
    n: usize,
    s: f64,
    set: &OrbitSet,
    rho: &CutoffWindow,
    cutoff: f64,
) -> Result<SeriesValue, SpectralError> {
    let terms = flat_trace_terms(n, set, rho, cutoff)?;
    if terms.is_empty() {
        return Err(SpectralError::Empty);
    }
    Ok(evaluate(&terms, s, 1.0, cutoff))
}

/// Iterates `γ^k`, `kτ♯ ≤ cutoff`, of primitive orbits with `r(γ) = n`,
/// paired with `I_ρ(γ)^k`.
fn iterates_with_n_zeros(
    n: usize,
    set: &OrbitSet,
    rho: &CutoffWindow,
    cutoff: f64,
) -> Result<Vec<(f64, f64, u32)>, SpectralError> {
    check_cutoff(set, cutoff)?;
    if !set.zero_filter.admits(n) {
        return Err(SpectralError::Incomplete(format!("orbits with {n} zeros")));
    }
    let mut out = Vec::new();
    for t in set.terms.iter().filter(|t| t.zeros == n) {
        let i1 = i_rho(t, 1, rho, set.d0_circumference);
        let mut k = 1u32;
        while k as f64 * t.tau <= cutoff {
            out.push((t.tau, i1.powi(k as i32), k));
            k += 1;
        }
    }
    Ok(out)
}

/// Terms of `s·G_{n,ρ}(s) = Σ_γ Σ_k τ♯(γ) I_ρ(γ)^k e^{−s k τ♯(γ)}`.
pub fn g_terms(
    n: usize,
    set: &OrbitSet,
    rho: &CutoffWindow,
    cutoff: f64,
) -> Result<Vec<SeriesTerm>, SpectralError> {
    let terms = iterates_with_n_zeros(n, set, rho, cutoff)?
        .into_iter()
        .map(|(tau, w, k)| SeriesTerm { tau: k as f64 * tau, weight: tau * w })
        .collect();
    Ok(sorted_terms(terms))
}

pub fn g_series(
    n: usize,
    s: f64,
    set: &OrbitSet,
    rho: &CutoffWindow,
    cutoff: f64,
) -> Result<SeriesValue, SpectralError> {
    if !(s > 0.0) {
        return Err(SpectralError::BadInput(format!("s must be positive, got {s}")));
    }
    let terms = g_terms(n, set, rho, cutoff)?;
    if terms.is_empty() {
        return Err(SpectralError::Empty);
    }
    Ok(evaluate(&terms, s, 1.0 / s, cutoff))
}

/// `log ζ_{n,ρ}(s) = Σ_γ Σ_k I_ρ(γ)^k e^{−s k τ♯(γ)} / k`, truncated like
/// [`g_series`] so that `∂_s log ζ_{n,ρ} = −s G_{n,ρ}` holds term by term.
pub fn log_zeta_n(
    n: usize,
    s: f64,
    set: &OrbitSet,
    rho: &CutoffWindow,
    cutoff: f64,
) -> Result<SeriesValue, SpectralError> {
    let terms: Vec<SeriesTerm> = iterates_with_n_zeros(n, set, rho, cutoff)?
        .into_iter()
        .map(|(tau, w, k)| SeriesTerm { tau: k as f64 * tau, weight: w / k as f64 })
        .collect();
    if terms.is_empty() {
        return Err(SpectralError::Empty);
    }
    Ok(evaluate(&sorted_terms(terms), s, 1.0, cutoff))
}

/// Series dump, one row per abscissa.
pub fn series_csv(rows: &[SeriesValue]) -> String {
    let mut out = String::from("s;value;term_count;tail_estimate\n");
    for r in rows {
        out.push_str(&format!(
            "{};{};{};{}\n",
            crate::solver::database::fmt_f64(r.s),
            crate::solver::database::fmt_f64(r.value),
            r.term_count,
            crate::solver::database::fmt_f64(r.tail_estimate)
        ));
    }
    out
}
