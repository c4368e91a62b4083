//! Topological entropy of the zero-free billiard from the pressure of
//! periodic sequences and from the growth of the orbit count.

use std::str::FromStr;

use serde::Serialize;

use super::{OrbitSet, SpectralError};
use crate::solver::shadowing::linear_fit;
use crate::symbolic::divisors;

/// Minimum number of words for the default pressure window.
pub const MIN_ENTROPY_WORD_LEN: usize = 10;
const REGRESSION_MIN_BINS: usize = 5;
const REGRESSION_BINS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntropyMethod {
    Pressure,
    Regression,
    Both,
}

impl FromStr for EntropyMethod {
    type Err = SpectralError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pressure" => Ok(Self::Pressure),
            "regression" => Ok(Self::Regression),
            "both" => Ok(Self::Both),
            _ => Err(SpectralError::BadInput(format!("unknown entropy method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyEstimate {
    pub h_hat: f64,
    pub pressure: Option<f64>,
    /// `(N, root of P_N)` for the word lengths used.
    pub pressure_roots: Vec<(usize, f64)>,
    pub regression: Option<f64>,
    pub regression_window: Option<(f64, f64)>,
    /// `|h_p − h_r| / mean(h_p, h_r)`.
    pub discrepancy: Option<f64>,
}

fn zero_free_ready(set: &OrbitSet, n: usize) -> Result<(), SpectralError> {
    if !set.zero_filter.admits(0) {
        return Err(SpectralError::Incomplete("zero-free orbits".into()));
    }
    if n > set.max_word_len {
        return Err(SpectralError::Incomplete(format!(
            "word length {n} (database stops at {})",
            set.max_word_len
        )));
    }
    Ok(())
}

/// Exponents `τ(u)` and multiplicities for every zero-free periodic sequence
/// of length `n`: a primitive orbit of `m | n` letters stands for `m`
/// sequences with period `(n/m)·τ`.
fn sequence_periods(n: usize, set: &OrbitSet) -> Vec<(f64, f64)> {
    let divs = divisors(n);
    set.terms
        .iter()
        .filter(|t| t.zeros == 0 && divs.contains(&t.word_len))
        .map(|t| ((n / t.word_len) as f64 * t.tau, t.word_len as f64))
        .collect()
}

fn log_sum(periods: &[(f64, f64)], s: f64) -> f64 {
    let exps: Vec<f64> = periods.iter().map(|&(tau, m)| m.ln() - s * tau).collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    let rest: Vec<f64> = exps.iter().map(|e| (e - top).exp()).collect();
    top + super::pairwise_sum(&rest).ln()
}

/// `P_N(s) = (1/N) log Σ_{|u| = N} e^{−s τ(u)}` over zero-free sequences.
pub fn pressure(n: usize, s: f64, set: &OrbitSet) -> Result<f64, SpectralError> {
    zero_free_ready(set, n)?;
    let periods = sequence_periods(n, set);
    if periods.is_empty() {
        return Err(SpectralError::Empty);
    }
    Ok(log_sum(&periods, s) / n as f64)
}

/// The zero of `s ↦ P_N(s)`, by bisection.
pub fn pressure_root(n: usize, set: &OrbitSet) -> Result<f64, SpectralError> {
    zero_free_ready(set, n)?;
    let periods = sequence_periods(n, set);
    if periods.is_empty() {
        return Err(SpectralError::Empty);
    }
    let f = |s: f64| log_sum(&periods, s);
    let mut lo = 0.0;
    if f(lo) <= 0.0 {
        return Err(SpectralError::NotBracketed(n));
    }
    let mut hi = 1.0 / periods.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut expansions = 0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        expansions += 1;
        if expansions > 200 {
            return Err(SpectralError::NotBracketed(n));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Aitken Δ² on the last three values, or the last value when the second
/// difference vanishes.
pub fn aitken(x: &[f64]) -> f64 {
    let n = x.len();
    assert!(n >= 1);
    if n < 3 {
        return x[n - 1];
    }
    let (a, b, c) = (x[n - 3], x[n - 2], x[n - 1]);
    let d2 = c - 2.0 * b + a;
    if d2.abs() <= 1e-15 * c.abs().max(1.0) {
        c
    } else {
        c - (c - b).powi(2) / d2
    }
}

/// Pressure roots for `N = n_max−3..=n_max`, Aitken-extrapolated.
pub fn pressure_entropy(set: &OrbitSet, n_max: usize) -> Result<(f64, Vec<(usize, f64)>), SpectralError> {
    if n_max < 5 {
        return Err(SpectralError::BadInput(format!("need words of length >= 5, got {n_max}")));
    }
    let roots: Vec<(usize, f64)> = (n_max - 3..=n_max)
        .map(|n| pressure_root(n, set).map(|r| (n, r)))
        .collect::<Result<_, _>>()?;
    let values: Vec<f64> = roots.iter().map(|r| r.1).collect();
    Ok((aitken(&values), roots))
}

/// Primitive zero-free counts `N(t) = #{γ : τ(γ) ≤ t}` on a grid.
pub fn zero_free_counts(set: &OrbitSet, grid: &[f64]) -> Vec<u64> {
    let mut taus: Vec<f64> = set.terms.iter().filter(|t| t.zeros == 0).map(|t| t.tau).collect();
    taus.sort_by(f64::total_cmp);
    grid.iter()
        .map(|&t| taus.partition_point(|&x| x <= t) as u64)
        .collect()
}

/// Default regression window: the top two count-decades below the certificate.
pub fn regression_window(set: &OrbitSet) -> Option<(f64, f64)> {
    let hi = set.certified_t * (1.0 - 1e-12);
    if !hi.is_finite() {
        return None;
    }
    let taus = sorted_zero_free_periods(set, f64::NEG_INFINITY, hi);
    let n_hi = taus.len();
    if n_hi < 100 {
        return None;
    }
    Some((taus[n_hi / 100 - 1], hi))
}

fn sorted_zero_free_periods(set: &OrbitSet, lo: f64, hi: f64) -> Vec<f64> {
    let mut taus: Vec<f64> = set
        .terms
        .iter()
        .filter(|t| t.zeros == 0 && t.tau >= lo && t.tau <= hi)
        .map(|t| t.tau)
        .collect();
    taus.sort_by(f64::total_cmp);
    taus
}

/// Fit `log(N(t)·h·t) = a + b t`, iterating `h ← b` to a fixed point.
///
/// The sample points are count quantiles of the periods inside the window,
/// each evaluated at an orbit period so that `N` is read just after a jump.
pub fn regression_entropy(
    set: &OrbitSet,
    window: (f64, f64),
) -> Result<f64, SpectralError> {
    let (lo, hi) = window;
    if hi >= set.certified_t {
        return Err(SpectralError::Incomplete(format!(
            "regression up to {hi} (certified below {})",
            set.certified_t
        )));
    }
    let inside = sorted_zero_free_periods(set, lo, hi);
    let mut grid: Vec<f64> = Vec::with_capacity(REGRESSION_BINS);
    if let Some(last) = inside.len().checked_sub(1) {
        for i in 0..REGRESSION_BINS {
            let t = inside[i * last / (REGRESSION_BINS - 1)];
            if grid.last() != Some(&t) {
                grid.push(t);
            }
        }
    }
    let counts = zero_free_counts(set, &grid);
    let bins: Vec<(f64, f64)> = grid
        .iter()
        .zip(&counts)
        .map(|(&t, &c)| (t, c as f64))
        .collect();
    if bins.len() < REGRESSION_MIN_BINS {
        return Err(SpectralError::BadInput(format!(
            "regression needs {REGRESSION_MIN_BINS} bins, got {}",
            bins.len()
        )));
    }
    let mut h = 0.1;
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = bins.iter().map(|&(t, c)| (t, (c * h * t).ln())).collect();
        let (_, b) = linear_fit(&pts);
        let done = (b - h).abs() <= 1e-14 * b.abs();
        h = b;
        if done {
            break;
        }
    }
    if !(h > 0.0) {
        return Err(SpectralError::BadInput(format!("regression slope {h} is not positive")));
    }
    Ok(h)
}

pub fn entropy_estimate(
    set: &OrbitSet,
    method: EntropyMethod,
) -> Result<EntropyEstimate, SpectralError> {
    let n_max = set.max_word_len;
    if n_max < MIN_ENTROPY_WORD_LEN {
        return Err(SpectralError::Incomplete(format!(
            "entropy needs words to length {MIN_ENTROPY_WORD_LEN}, database stops at {n_max}"
        )));
    }
    let (pressure, pressure_roots) = if method != EntropyMethod::Regression {
        let (h, roots) = pressure_entropy(set, n_max)?;
        (Some(h), roots)
    } else {
        (None, Vec::new())
    };
    let (regression, regression_window) = if method != EntropyMethod::Pressure {
        let window = regression_window(set)
            .ok_or_else(|| {
                SpectralError::Incomplete("a regression (fewer than 100 zero-free orbits below the certificate)".into())
            })?;
        (Some(regression_entropy(set, window)?), Some(window))
    } else {
        (None, None)
    };
    let discrepancy = match (pressure, regression) {
        (Some(a), Some(b)) => Some((a - b).abs() / (0.5 * (a + b))),
        _ => None,
    };
    let h_hat = match (pressure, regression) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!("at least one method runs"),
    };
    Ok(EntropyEstimate {
        h_hat,
        pressure,
        pressure_roots,
        regression,
        regression_window,
        discrepancy,
    })
}
