//! Concatenation defects and exponential shadowing of long common blocks.

use super::length::bounce_points;
use super::orbit::{solve_cycle, solve_letters, SolveOptions};
use super::SolverError;
use crate::geometry::BilliardTable;
use crate::symbolic::{check_cyclic_adjacency, Letter};

/// `τ(γ_{uv}) − τ(γ_u) − τ(γ_v)`.
pub fn concat_defect(
    u: &[Letter],
    v: &[Letter],
    table: &BilliardTable,
    opts: &SolveOptions,
) -> Result<f64, SolverError> {
    let uv: Vec<Letter> = u.iter().chain(v).copied().collect();
    let tuv = solve_letters(&uv, table, opts)?.tau;
    let tu = solve_letters(u, table, opts)?.tau;
    let tv = solve_letters(v, table, opts)?.tau;
    Ok(tuv - tu - tv)
}

/// Two cyclic words sharing the block `letters[..2N+1]`, compared at bounce `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingPair {
    pub depth: usize,
    pub first: Vec<Letter>,
    pub second: Vec<Letter>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingFit {
    pub c: f64,
    pub beta: f64,
    /// `(N, distance)` for every pair in the family.
    pub distances: Vec<(usize, f64)>,
}

/// Pairs whose common block repeats `pattern` for `2N+1` letters, closed by
/// the two lexicographically first admissible tails of length at most 3.
pub fn shadowing_family(
    pattern: &[Letter],
    alphabet: &[Letter],
    max_depth: usize,
) -> Result<Vec<ShadowingPair>, SolverError> {
    let mut family = Vec::new();
    for depth in 1..=max_depth {
        let block: Vec<Letter> = (0..2 * depth + 1).map(|i| pattern[i % pattern.len()]).collect();
        let tails = admissible_tails(&block, alphabet);
        if tails.len() < 2 {
            return Err(SolverError::InsufficientFamily(format!(
                "no two admissible tails for depth {depth}"
            )));
        }
        let close = |tail: &Vec<Letter>| block.iter().chain(tail).copied().collect();
        family.push(ShadowingPair {
            depth,
            first: close(&tails[0]),
            second: close(&tails[1]),
        });
    }
    Ok(family)
}

fn admissible_tails(block: &[Letter], alphabet: &[Letter]) -> Vec<Vec<Letter>> {
    let mut out = Vec::new();
    let mut current: Vec<Vec<Letter>> = vec![vec![]];
    for _ in 0..3 {
        let mut next = Vec::new();
        for prefix in &current {
            for &l in alphabet {
                let mut t = prefix.clone();
                t.push(l);
                next.push(t);
            }
        }
        for t in &next {
            let word: Vec<Letter> = block.iter().chain(t).copied().collect();
            if check_cyclic_adjacency(&word).is_ok() {
                out.push(t.clone());
            }
        }
        current = next;
    }
    out
}

/// Solve both words of every pair and fit `d(N) = C β^{−N}` by least squares
/// on `log d`.
pub fn shadowing_rate(
    family: &[ShadowingPair],
    table: &BilliardTable,
    opts: &SolveOptions,
) -> Result<ShadowingFit, SolverError> {
    let mut distances = Vec::with_capacity(family.len());
    for pair in family {
        let (a, _) = solve_cycle(&pair.first, table, opts)?;
        let (b, _) = solve_cycle(&pair.second, table, opts)?;
        let pa = bounce_points(&a, &pair.first, table)[pair.depth];
        let pb = bounce_points(&b, &pair.second, table)[pair.depth];
        distances.push((pair.depth, (pa - pb).norm()));
    }
    let usable: Vec<(f64, f64)> = distances
        .iter()
        .filter(|(_, d)| *d > 0.0)
        .map(|&(n, d)| (n as f64, d.ln()))
        .collect();
    if usable.len() < 4 {
        return Err(SolverError::InsufficientFamily(format!(
            "{} usable depths, need at least 4",
            usable.len()
        )));
    }
    let (intercept, slope) = linear_fit(&usable);
    Ok(ShadowingFit {
        c: intercept.exp(),
        beta: (-slope).exp(),
        distances,
    })
}

/// Ordinary least squares `y = a + b x`; returns `(a, b)`.
pub(crate) fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}
