//! Cyclic length functional `L(θ) = Σ_k |P_{k+1}(θ_{k+1}) − P_k(θ_k)|`.
//!
//! Periodic billiard orbits are the critical points of `L`: `∂L/∂θ_k = 0`
//! is exactly the reflection law at bounce `k`.

use nalgebra::{DMatrix, Matrix2};

use super::SolverError;
use crate::geometry::{BilliardTable, Vec2};
use crate::symbolic::Letter;

/// Cyclic tridiagonal Hessian. `upper[k]` is the contribution of segment `k`
/// to `∂²L/∂θ_k∂θ_{k+1}` (indices mod N); for N = 2 both segments couple
/// the same pair of angles.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicHessian {
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CyclicHessian {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.diag.len();
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diag.clone()));
        for (k, &u) in self.upper.iter().enumerate() {
            let j = (k + 1) % n;
            h[(k, j)] += u;
            h[(j, k)] += u;
        }
        h
    }
}

#[derive(Debug, Clone)]
pub struct LengthEval {
    pub length: f64,
    pub gradient: Vec<f64>,
    pub hessian: CyclicHessian,
}

/// Bounce points for the given angles, one per letter.
pub fn bounce_points(angles: &[f64], letters: &[Letter], table: &BilliardTable) -> Vec<Vec2> {
    letters
        .iter()
        .zip(angles)
        .map(|(&l, &t)| {
            let d = table.disk(l);
            d.center + d.radius * Vec2::new(t.cos(), t.sin())
        })
        .collect()
}

pub fn length_only(angles: &[f64], letters: &[Letter], table: &BilliardTable) -> f64 {
    let pts = bounce_points(angles, letters, table);
    let n = pts.len();
    (0..n).map(|k| (pts[(k + 1) % n] - pts[k]).norm()).sum()
}

/// Length, exact gradient and exact Hessian in the boundary angles.
pub fn length_functional(
    angles: &[f64],
    letters: &[Letter],
    table: &BilliardTable,
) -> Result<LengthEval, SolverError> {
    let n = letters.len();
    if n < 2 || angles.len() != n {
        return Err(SolverError::BadInput(format!(
            "{} angles for a word of {} letters",
            angles.len(),
            n
        )));
    }
    let mut pos = Vec::with_capacity(n);
    let mut tangent = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for (&l, &t) in letters.iter().zip(angles) {
        let d = table.disk(l);
        let (c, s) = (t.cos(), t.sin());
        pos.push(d.center + d.radius * Vec2::new(c, s));
        tangent.push(d.radius * Vec2::new(-s, c));
        second.push(-d.radius * Vec2::new(c, s));
    }
    let mut length = 0.0;
    let mut gradient = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for k in 0..n {
        let (a, b) = (k, (k + 1) % n);
        let d = pos[b] - pos[a];
        let l = d.norm();
        if l < 1e-14 {
            return Err(SolverError::Degenerate { segment: k });
        }
        let u = d / l;
        // Hessian of |d| with respect to d.
        let proj = (Matrix2::identity() - u * u.transpose()) / l;
        length += l;
        gradient[a] -= u.dot(&tangent[a]);
        gradient[b] += u.dot(&tangent[b]);
        diag[a] += tangent[a].dot(&(proj * tangent[a])) - u.dot(&second[a]);
        diag[b] += tangent[b].dot(&(proj * tangent[b])) + u.dot(&second[b]);
        upper[k] -= tangent[a].dot(&(proj * tangent[b]));
    }
    Ok(LengthEval {
        length,
        gradient,
        hessian: CyclicHessian { diag, upper },
    })
}
