//! Counting functions `N(n, t)`, `Ñ(n, t)` and `N_ρ(n, t)` for orbits with
//! `n` bounces on `D₀`, growth fits, a-priori bounds and the comparison
//! between weighted and plain counts.

use serde::Serialize;
use thiserror::Error;

use crate::solver::shadowing::linear_fit;
use crate::spectral::{i_rho, CutoffWindow, OrbitSet};
use crate::symbolic::{concat_f, concat_g, Letter};

#[derive(Debug, Error)]
pub enum CountingError {
    #[error("t = {t_max} is beyond the completeness certificate (complete below {certified})")]
    Uncertified { t_max: f64, certified: f64 },
    #[error("database is incomplete for {0}")]
    Incomplete(String),
    #[error("{0}")]
    BadInput(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountingCurve {
    pub n: usize,
    pub t_grid: Vec<f64>,
    /// Primitive orbits with `r(γ) = n` and `τ(γ) ≤ t`.
    pub counts: Vec<u64>,
    /// Including iterates `γ^k` with `k·r(γ) = n` and `kτ(γ) ≤ t`.
    pub counts_all: Vec<u64>,
    /// `Σ I_ρ(γ)` over the primitive orbits counted in `counts`.
    pub weighted: Option<Vec<f64>>,
}

/// `n` evenly spaced periods in `(0, certified)`, ending just below it.
pub fn certified_grid(set: &OrbitSet, points: usize) -> Vec<f64> {
    let hi = set.certified_t * (1.0 - 1e-12);
    (1..=points).map(|i| hi * i as f64 / points as f64).collect()
}

pub fn count_curves(
    set: &OrbitSet,
    n: usize,
    t_grid: &[f64],
    rho: Option<&CutoffWindow>,
) -> Result<CountingCurve, CountingError> {
    if t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(CountingError::BadInput("t grid must be nondecreasing".into()));
    }
    let t_max = t_grid.last().copied().unwrap_or(0.0);
    if t_max >= set.certified_t {
        return Err(CountingError::Uncertified {
            t_max,
            certified: set.certified_t,
        });
    }
    if !set.zero_filter.admits(n) {
        return Err(CountingError::Incomplete(format!("orbits with {n} zeros")));
    }
    if n > 0 && !set.filter_admits_iterates(n) {
        return Err(CountingError::Incomplete(format!("orbits with zero counts dividing {n}")));
    }
    let mut primitive: Vec<(f64, f64)> = Vec::new();
    let mut all: Vec<f64> = Vec::new();
    for term in &set.terms {
        if term.zeros == n {
            let w = rho.map_or(1.0, |r| i_rho(term, 1, r, set.d0_circumference));
            primitive.push((term.tau, w));
        }
        if n == 0 && term.zeros == 0 {
            let mut k = 1.0;
            while k * term.tau <= t_max {
                all.push(k * term.tau);
                k += 1.0;
            }
        } else if n > 0 && term.zeros > 0 && n % term.zeros == 0 {
            all.push((n / term.zeros) as f64 * term.tau);
        }
    }
    primitive.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.sort_by(f64::total_cmp);
    let mut counts = Vec::with_capacity(t_grid.len());
    let mut counts_all = Vec::with_capacity(t_grid.len());
    let mut weighted = Vec::with_capacity(t_grid.len());
    let mut i = 0;
    let mut acc = Vec::new();
    for &t in t_grid {
        while i < primitive.len() && primitive[i].0 <= t {
            acc.push(primitive[i].1);
            i += 1;
        }
        counts.push(i as u64);
        weighted.push(crate::spectral::pairwise_sum(&acc));
        counts_all.push(all.partition_point(|&x| x <= t) as u64);
    }
    Ok(CountingCurve {
        n,
        t_grid: t_grid.to_vec(),
        counts,
        counts_all,
        weighted: rho.map(|_| weighted),
    })
}

impl CountingCurve {
    /// `[t_lo, t_hi]` with `t_hi` the last grid point and `t_lo` the first
    /// where the count reaches `1/factor` of its final value.
    pub fn top_window(&self, factor: f64) -> Option<(f64, f64)> {
        let last = *self.counts.last()?;
        if last == 0 {
            return None;
        }
        let threshold = last as f64 / factor;
        let k = self.counts.iter().position(|&c| c as f64 >= threshold)?;
        Some((self.t_grid[k], *self.t_grid.last()?))
    }

    /// The top count-decade.
    pub fn top_decade(&self) -> Option<(f64, f64)> {
        self.top_window(10.0)
    }

    /// Grid indices with `t` inside `[lo, hi]` and a nonzero count.
    pub fn indices_in(&self, window: (f64, f64)) -> Vec<usize> {
        (0..self.t_grid.len())
            .filter(|&k| {
                let t = self.t_grid[k];
                t >= window.0 && t <= window.1 && self.counts[k] > 0
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let fmt = crate::solver::database::fmt_f64;
        let mut out = String::from("t;count;count_all;weighted\n");
        for k in 0..self.t_grid.len() {
            let w = self.weighted.as_ref().map_or(String::new(), |w| fmt(w[k]));
            out.push_str(&format!(
                "{};{};{};{}\n",
                fmt(self.t_grid[k]),
                self.counts[k],
                self.counts_all[k],
                w
            ));
        }
        out
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `ĉ_n(t) = (n!·N(n,t)·h·t / (tⁿ e^{ht}))^{1/n}`.
pub fn c_estimate(n: usize, count: f64, h: f64, t: f64) -> f64 {
    let logv = factorial(n).ln() + count.ln() + (h * t).ln() - n as f64 * t.ln() - h * t;
    (logv / n as f64).exp()
}

/// `r(n,t) = N(n,t)·n!·h·t / ((ct)ⁿ e^{ht})`.
pub fn theorem_ratio(n: usize, count: f64, h: f64, c: f64, t: f64) -> f64 {
    let logv = count.ln() + factorial(n).ln() + (h * t).ln() - n as f64 * (c * t).ln() - h * t;
    logv.exp()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub h_hat: f64,
    /// Geometric mean of the per-`n` constants.
    pub c_hat: f64,
    pub c_per_n: Vec<(usize, f64)>,
    /// `max ĉ_n / min ĉ_n`.
    pub c_spread: f64,
    pub fit_window: (f64, f64),
    /// `log r(1, t)` at the grid points of the fit window.
    pub residuals: Vec<f64>,
    pub n_used: Vec<usize>,
    pub h_hint: Option<f64>,
}

/// Minimum final count of the `n = 1` curve for a fit.
pub const MIN_FIT_COUNT: u64 = 50;

/// Fit `N(n,t) ≈ (ct)ⁿ/n! · e^{ht}/(ht)`.
///
/// `ĥ` is the least-squares slope of `log N(1,t)` (for `n = 1` the law reads
/// `log N = ht + log(c/h)`) over `window`, by default the top decade of the
/// `n = 1` curve. Each `ĉ_n` is the mean of `ĉ_n(t)` over the top
/// half-decade of curve `n`.
pub fn fit_growth(
    curves: &[CountingCurve],
    h_hint: Option<f64>,
    window: Option<(f64, f64)>,
) -> Result<GrowthFit, CountingError> {
    let first = curves
        .iter()
        .find(|c| c.n == 1)
        .ok_or_else(|| CountingError::BadInput("fit needs the n = 1 curve".into()))?;
    let last = first.counts.last().copied().unwrap_or(0);
    if last < MIN_FIT_COUNT {
        return Err(CountingError::Fit(format!(
            "N(1, t) reaches only {last}, need at least {MIN_FIT_COUNT}"
        )));
    }
    let fit_window = match window {
        Some(w) => w,
        None => first
            .top_decade()
            .ok_or_else(|| CountingError::Fit("empty n = 1 curve".into()))?,
    };
    let idx = first.indices_in(fit_window);
    if idx.len() < 3 {
        return Err(CountingError::Fit(format!(
            "{} grid points in the fit window",
            idx.len()
        )));
    }
    let pts: Vec<(f64, f64)> = idx
        .iter()
        .map(|&k| (first.t_grid[k], (first.counts[k] as f64).ln()))
        .collect();
    let (_, h_hat) = linear_fit(&pts);
    if !(h_hat > 0.0 && h_hat.is_finite()) {
        return Err(CountingError::Fit(format!("non-positive growth rate {h_hat}")));
    }
    let mut c_per_n = Vec::new();
    for curve in curves {
        if curve.n == 0 {
            continue;
        }
        let Some(half) = curve.top_window(10f64.sqrt()) else {
            continue;
        };
        let k = curve.indices_in(half);
        if k.is_empty() {
            continue;
        }
        let mean = k
            .iter()
            .map(|&i| c_estimate(curve.n, curve.counts[i] as f64, h_hat, curve.t_grid[i]))
            .sum::<f64>()
            / k.len() as f64;
        c_per_n.push((curve.n, mean));
    }
    let c1 = c_per_n
        .iter()
        .find(|c| c.0 == 1)
        .map(|c| c.1)
        .ok_or_else(|| CountingError::Fit("no constant for n = 1".into()))?;
    let c_hat = (c_per_n.iter().map(|c| c.1.ln()).sum::<f64>() / c_per_n.len() as f64).exp();
    let (lo, hi) = c_per_n
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(c.1), b.max(c.1)));
    let residuals = idx
        .iter()
        .map(|&k| theorem_ratio(1, first.counts[k] as f64, h_hat, c1, first.t_grid[k]).ln())
        .collect();
    Ok(GrowthFit {
        h_hat,
        c_hat,
        c_spread: hi / lo,
        n_used: c_per_n.iter().map(|c| c.0).collect(),
        c_per_n,
        fit_window,
        residuals,
        h_hint,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AprioriReport {
    pub n: usize,
    pub window: Option<(f64, f64)>,
    pub q_min: f64,
    pub q_max: f64,
    pub ratio: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

pub const DEFAULT_APRIORI_BOUND: f64 = 50.0;

/// `q(t) = N(n,t) / (t^{n−1} e^{ĥt})` over the top decade of the curve.
pub fn check_apriori(curve: &CountingCurve, h_hat: f64, bound: f64) -> AprioriReport {
    let degenerate = AprioriReport {
        n: curve.n,
        window: None,
        q_min: 0.0,
        q_max: 0.0,
        ratio: f64::NAN,
        bound,
        verdict: Verdict::Degenerate,
    };
    let Some(window) = curve.top_decade() else {
        return degenerate;
    };
    let qs: Vec<f64> = curve
        .indices_in(window)
        .into_iter()
        .map(|k| {
            let t = curve.t_grid[k];
            let logq = (curve.counts[k] as f64).ln()
                - (curve.n as f64 - 1.0) * t.ln()
                - h_hat * t;
            logq.exp()
        })
        .collect();
    if qs.is_empty() {
        return degenerate;
    }
    let q_min = qs.iter().copied().fold(f64::INFINITY, f64::min);
    let q_max = qs.iter().copied().fold(0.0, f64::max);
    let ratio = q_max / q_min;
    AprioriReport {
        n: curve.n,
        window: Some(window),
        q_min,
        q_max,
        ratio,
        bound,
        verdict: if ratio < bound { Verdict::Pass } else { Verdict::Fail },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedReport {
    pub n: usize,
    pub t0: f64,
    pub t_grid: Vec<f64>,
    pub counts: Vec<u64>,
    pub weighted: Vec<f64>,
    /// `1 − N_ρ(n,t)/N(n,t)`, `None` where `N(n,t) = 0`.
    pub deficit: Vec<Option<f64>>,
    /// `Ñ(n, t₀, t)`: orbits with some interval between `D₀` bounces below `t₀`.
    pub short_counts: Vec<u64>,
}

pub fn compare_weighted(
    set: &OrbitSet,
    n: usize,
    t_grid: &[f64],
    rho: &CutoffWindow,
    t0: f64,
) -> Result<WeightedReport, CountingError> {
    if n == 0 {
        return Err(CountingError::BadInput("weighted counts need n >= 1".into()));
    }
    let curve = count_curves(set, n, t_grid, Some(rho))?;
    let weighted = curve.weighted.expect("weights requested");
    let mut short: Vec<f64> = set
        .terms
        .iter()
        .filter(|t| t.zeros == n && t.d0_intervals.iter().any(|&d| d < t0))
        .map(|t| t.tau)
        .collect();
    short.sort_by(f64::total_cmp);
    let short_counts = t_grid.iter().map(|&t| short.partition_point(|&x| x <= t) as u64).collect();
    let deficit = curve
        .counts
        .iter()
        .zip(&weighted)
        .map(|(&c, &w)| (c > 0).then(|| 1.0 - w / c as f64))
        .collect();
    Ok(WeightedReport {
        n,
        t0,
        t_grid: t_grid.to_vec(),
        counts: curve.counts,
        weighted,
        deficit,
        short_counts,
    })
}

impl WeightedReport {
    /// Least-squares slope of `log(N(n,t)/Ñ(n,t₀,t))` against `log t` over
    /// the grid points of `window` where both counts are positive.
    pub fn census_slope(&self, window: (f64, f64)) -> Option<f64> {
        let pts: Vec<(f64, f64)> = (0..self.t_grid.len())
            .filter(|&k| {
                let t = self.t_grid[k];
                t >= window.0 && t <= window.1 && self.short_counts[k] > 0
            })
            .map(|k| {
                let ratio = self.counts[k] as f64 / self.short_counts[k] as f64;
                (self.t_grid[k].ln(), ratio.ln())
            })
            .collect();
        if pts.len() < 3 {
            return None;
        }
        Some(linear_fit(&pts).1)
    }
}

/// Means of `values` over `blocks` consecutive equal slices, skipping `None`.
pub fn block_means(values: &[Option<f64>], blocks: usize) -> Vec<Option<f64>> {
    let len = values.len();
    (0..blocks)
        .map(|b| {
            let slice = &values[b * len / blocks..(b + 1) * len / blocks];
            let v: Vec<f64> = slice.iter().flatten().copied().collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        })
        .collect()
}

/// How a word with exactly one zero arises from a zero-free word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FgForm {
    /// `0u`, with `u` cyclically admissible or a single letter.
    F(Vec<Letter>),
    /// `0u₁⋯u_Nu₁`.
    G(Vec<Letter>),
}

/// Decompose a cyclic word with a single zero, rotated to start at the zero.
pub fn fg_preimage(letters: &[Letter]) -> Option<FgForm> {
    let z = letters.iter().position(|&l| l == 0)?;
    if letters.iter().filter(|&&l| l == 0).count() != 1 {
        return None;
    }
    let w: Vec<Letter> = letters[z + 1..].iter().chain(&letters[..z]).copied().collect();
    match w.len() {
        0 => None,
        1 => Some(FgForm::F(w)),
        _ if w[0] != w[w.len() - 1] => concat_f(&w).ok().map(|_| FgForm::F(w)),
        _ => {
            let u = w[..w.len() - 1].to_vec();
            concat_g(&u).ok().map(|_| FgForm::G(u))
        }
    }
}
