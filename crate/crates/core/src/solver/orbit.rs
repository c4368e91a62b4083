use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::length::{bounce_points, length_functional, length_only};
use super::SolverError;
use crate::dynamics::{
    billiard_map, monodromy, reflect, wrap_angle, BounceLink, MapStep, PhasePoint, StabilityData,
};
use crate::geometry::{BilliardTable, Vec2};
use crate::symbolic::{canonicalize, format_letters, CyclicWord, Letter};

pub const DEFAULT_GRAD_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 200;
pub const CLOSURE_TOL: f64 = 1e-8;
pub const FLIGHT_TOL: f64 = 1e-9;
pub const REFLECTION_TOL: f64 = 1e-10;
pub const CLEARANCE_TOL: f64 = 1e-9;
const MAX_HALVINGS: usize = 40;
const RESTARTS: usize = 8;
const JITTER: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_GRAD_TOL,
            max_iter: DEFAULT_MAX_ITER,
            seed: 0,
        }
    }
}

/// A solved primitive periodic orbit. `angles[k]` is the bounce on obstacle
/// `word.letters()[k]`, and `segment_lengths[k]` runs from bounce `k` to `k+1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub word: CyclicWord,
    pub angles: Vec<f64>,
    pub segment_lengths: Vec<f64>,
    pub tau: f64,
    pub tau_sharp: f64,
    pub zeros: usize,
    pub grad_residual: f64,
    pub closure_residual: f64,
    pub reflection_residual: f64,
    pub min_clearance: f64,
    pub stability: StabilityData,
}

impl PeriodicOrbit {
    /// Assemble the record for given bounce angles; fills every derived field
    /// except `closure_residual` (set by [`verify_orbit`]).
    pub fn from_angles(
        word: CyclicWord,
        angles: Vec<f64>,
        grad_residual: f64,
        table: &BilliardTable,
    ) -> Result<Self, SolverError> {
        let geometry = CycleGeometry::new(word.letters(), &angles, table)?;
        let tau: f64 = geometry.lengths.iter().sum();
        Ok(Self {
            zeros: word.zeros(),
            word,
            angles,
            tau,
            tau_sharp: tau,
            segment_lengths: geometry.lengths.clone(),
            grad_residual,
            closure_residual: f64::NAN,
            reflection_residual: geometry.reflection_residual,
            min_clearance: geometry.min_clearance,
            stability: geometry.stability(table)?,
        })
    }

    pub fn letters(&self) -> &[Letter] {
        self.word.letters()
    }

    pub fn points(&self, table: &BilliardTable) -> Vec<Vec2> {
        bounce_points(&self.angles, self.word.letters(), table)
    }

    /// Outgoing phase point at bounce `k`.
    pub fn phase_point(&self, k: usize, table: &BilliardTable) -> PhasePoint {
        let pts = self.points(table);
        let n = pts.len();
        let dir = (pts[(k + 1) % n] - pts[k]).normalize();
        PhasePoint::new(self.word.letters()[k], self.angles[k], dir)
    }

    /// Indices of the bounces on the distinguished obstacle.
    pub fn distinguished_bounces(&self) -> Vec<usize> {
        self.word
            .letters()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == 0)
            .map(|(k, _)| k)
            .collect()
    }

    /// Flight times between consecutive bounces on `D₀`, cyclically, over one
    /// primitive period. A single bounce gives the whole period.
    pub fn distinguished_intervals(&self) -> Vec<f64> {
        let idx = self.distinguished_bounces();
        let n = self.segment_lengths.len();
        let m = idx.len();
        (0..m)
            .map(|j| {
                let start = idx[j];
                let end = if m == 1 { idx[0] + n } else if j + 1 < m { idx[j + 1] } else { idx[0] + n };
                (start..end).map(|k| self.segment_lengths[k % n]).sum()
            })
            .collect()
    }

    pub fn min_segment(&self) -> f64 {
        self.segment_lengths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_segment(&self) -> f64 {
        self.segment_lengths.iter().copied().fold(0.0, f64::max)
    }
}

/// Positions, directions and physical diagnostics of a closed polygon
/// inscribed in the obstacles.
struct CycleGeometry {
    letters: Vec<Letter>,
    normals: Vec<Vec2>,
    dirs: Vec<Vec2>,
    lengths: Vec<f64>,
    reflection_residual: f64,
    min_clearance: f64,
    violation: Option<(usize, Letter, f64)>,
}

impl CycleGeometry {
    fn new(letters: &[Letter], angles: &[f64], table: &BilliardTable) -> Result<Self, SolverError> {
        let n = letters.len();
        let pts = bounce_points(angles, letters, table);
        let normals: Vec<Vec2> = angles.iter().map(|t| Vec2::new(t.cos(), t.sin())).collect();
        let mut dirs = Vec::with_capacity(n);
        let mut lengths = Vec::with_capacity(n);
        for k in 0..n {
            let d = pts[(k + 1) % n] - pts[k];
            let l = d.norm();
            if l < 1e-14 {
                return Err(SolverError::Degenerate { segment: k });
            }
            dirs.push(d / l);
            lengths.push(l);
        }
        let mut min_clearance = f64::INFINITY;
        let mut violation = None;
        for k in 0..n {
            let b = (k + 1) % n;
            // Leaves its own obstacle and enters the next one from outside.
            let out = dirs[k].dot(&normals[k]);
            let inc = -dirs[k].dot(&normals[b]);
            for (margin, obstacle) in [(out, letters[k]), (inc, letters[b])] {
                min_clearance = min_clearance.min(margin);
                if margin < CLEARANCE_TOL && violation.is_none() {
                    violation = Some((k, obstacle, margin));
                }
            }
            for disk in table.obstacles() {
                if disk.id == letters[k] || disk.id == letters[b] {
                    continue;
                }
                let margin = segment_distance(pts[k], pts[b], disk.center) - disk.radius;
                min_clearance = min_clearance.min(margin);
                if margin < CLEARANCE_TOL && violation.is_none() {
                    violation = Some((k, disk.id, margin));
                }
            }
        }
        let mut reflection_residual: f64 = 0.0;
        for k in 0..n {
            let incoming = dirs[(k + n - 1) % n];
            reflection_residual = reflection_residual.max(match reflect(incoming, normals[k]) {
                Ok(w) => (w - dirs[k]).norm(),
                Err(_) => f64::INFINITY,
            });
        }
        Ok(Self {
            letters: letters.to_vec(),
            normals,
            dirs,
            lengths,
            reflection_residual,
            min_clearance,
            violation,
        })
    }

    fn stability(&self, table: &BilliardTable) -> Result<StabilityData, SolverError> {
        let n = self.letters.len();
        let links: Vec<BounceLink> = (0..n)
            .map(|k| {
                let b = (k + 1) % n;
                BounceLink {
                    flight: self.lengths[k],
                    curvature: 1.0 / table.disk(self.letters[b]).radius,
                    cos_incidence: -self.dirs[k].dot(&self.normals[b]),
                }
            })
            .collect();
        let m = monodromy(&links)?;
        Ok(StabilityData::from_trace(m.trace()))
    }
}

fn segment_distance(a: Vec2, b: Vec2, p: Vec2) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (a + t * ab - p).norm()
}

/// Aim each bounce at the midpoint of the neighbouring obstacle centers.
pub fn chord_initializer(letters: &[Letter], table: &BilliardTable) -> Vec<f64> {
    let n = letters.len();
    (0..n)
        .map(|k| {
            let prev = table.disk(letters[(k + n - 1) % n]).center;
            let next = table.disk(letters[(k + 1) % n]).center;
            let here = table.disk(letters[k]).center;
            let target = 0.5 * (prev + next) - here;
            target.y.atan2(target.x)
        })
        .collect()
}

/// Damped Newton on the cyclic length functional from `start`.
fn newton(
    letters: &[Letter],
    table: &BilliardTable,
    start: Vec<f64>,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, f64), f64> {
    let n = letters.len();
    let mut theta = start;
    let mut last = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let eval = length_functional(&theta, letters, table).map_err(|_| last)?;
        let g = eval.gradient.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        last = g;
        if g < opts.tol {
            return Ok((theta.iter().map(|&t| wrap_angle(t)).collect(), g));
        }
        let grad = DVector::from_vec(eval.gradient.clone());
        let step = newton_step(eval.hessian.to_dense(), &grad).ok_or(g)?;
        let slack = 8.0 * f64::EPSILON * eval.length.abs().max(1.0);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<f64> = (0..n).map(|k| theta[k] + alpha * step[k]).collect();
            if length_only(&trial, letters, table) <= eval.length + slack {
                theta = trial;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(g);
        }
    }
    let eval = length_functional(&theta, letters, table).map_err(|_| last)?;
    let g = eval.gradient.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if g < opts.tol {
        Ok((theta.iter().map(|&t| wrap_angle(t)).collect(), g))
    } else {
        Err(g)
    }
}

/// Solve `H δ = −g`, shifting the Hessian towards positive definiteness
/// when it is not.
fn newton_step(h: DMatrix<f64>, g: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = h.diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-12);
    let mut shift = 0.0;
    for _ in 0..60 {
        let mut m = h.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        if let Some(ch) = m.cholesky() {
            return Some(-ch.solve(g));
        }
        shift = if shift == 0.0 { 1e-10 * scale } else { shift * 10.0 };
    }
    None
}

fn word_seed(letters: &[Letter], seed: u64) -> u64 {
    letters
        .iter()
        .fold(seed ^ 0x9e37_79b9_7f4a_7c15, |h, &l| {
            (h ^ l as u64).wrapping_mul(0x0100_0000_01b3)
        })
}

/// Solve a cyclic word given in any rotation. The returned angles follow
/// the rotation of `letters`.
pub fn solve_cycle(
    letters: &[Letter],
    table: &BilliardTable,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, f64), SolverError> {
    let base = chord_initializer(letters, table);
    let mut rng = ChaCha8Rng::seed_from_u64(word_seed(letters, opts.seed));
    let mut last_residual = f64::INFINITY;
    let mut penetration = None;
    for attempt in 0..=RESTARTS {
        let start = if attempt == 0 {
            base.clone()
        } else {
            base.iter().map(|&t| t + rng.random_range(-JITTER..JITTER)).collect()
        };
        match newton(letters, table, start, opts) {
            Ok((angles, g)) => {
                let geometry = CycleGeometry::new(letters, &angles, table)?;
                match geometry.violation {
                    None if geometry.reflection_residual < REFLECTION_TOL => {
                        return Ok((angles, g));
                    }
                    None => last_residual = geometry.reflection_residual,
                    Some((segment, obstacle, margin)) => {
                        penetration.get_or_insert((segment, obstacle, margin));
                    }
                }
            }
            Err(g) => last_residual = g,
        }
    }
    if let Some((segment, obstacle, margin)) = penetration {
        return Err(SolverError::SegmentPenetration {
            word: format_letters(letters),
            segment,
            obstacle,
            margin,
        });
    }
    Err(SolverError::NonConvergence {
        word: format_letters(letters),
        residual: last_residual,
    })
}

/// Solve a canonical primitive word to its periodic orbit and verify it by
/// re-tracing with the billiard map.
pub fn solve_orbit(
    word: &CyclicWord,
    table: &BilliardTable,
    opts: &SolveOptions,
) -> Result<PeriodicOrbit, SolverError> {
    if !word.is_primitive() {
        return Err(SolverError::NotPrimitive(word.to_string()));
    }
    if let Some(&bad) = word.letters().iter().find(|&&l| table.get(l).is_none()) {
        return Err(SolverError::BadInput(format!(
            "letter {bad} of word {word} is not an obstacle"
        )));
    }
    let (angles, g) = solve_cycle(word.letters(), table, opts)?;
    let mut orbit = PeriodicOrbit::from_angles(word.clone(), angles, g, table)?;
    let report = verify_orbit(&orbit, table);
    orbit.closure_residual = report.closure_residual;
    if !report.ok {
        return Err(SolverError::Verification {
            word: word.to_string(),
            detail: report.detail.unwrap_or_default(),
        });
    }
    Ok(orbit)
}

/// Convenience: canonicalize raw letters, then [`solve_orbit`].
pub fn solve_letters(
    letters: &[Letter],
    table: &BilliardTable,
    opts: &SolveOptions,
) -> Result<PeriodicOrbit, SolverError> {
    let word = canonicalize(letters)?;
    solve_orbit(&word, table, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub ok: bool,
    pub closure_residual: f64,
    pub max_flight_error: f64,
    pub detail: Option<String>,
}

/// Re-trace the orbit with the billiard map, one bounce at a time.
///
/// Step `k` starts from the solved outgoing phase point at bounce `k` and
/// must land on obstacle `k+1` after flight `segment_lengths[k]`; the last
/// step returns to bounce 0. `closure_residual` is the largest
/// `sqrt(|ΔP|² + |Δv|²)` between a mapped point and the solved one.
/// Anchoring every step keeps round-off from being amplified by the
/// orbit's instability, which a single free run of `N` steps would do.
pub fn verify_orbit(orbit: &PeriodicOrbit, table: &BilliardTable) -> VerifyReport {
    let letters = orbit.word.letters();
    let n = letters.len();
    let pts = orbit.points(table);
    let phase: Vec<PhasePoint> = (0..n)
        .map(|k| {
            let dir = (pts[(k + 1) % n] - pts[k]).normalize();
            PhasePoint::new(letters[k], orbit.angles[k], dir)
        })
        .collect();
    let mut max_flight_error: f64 = 0.0;
    let mut closure_residual: f64 = 0.0;
    let fail = |detail: String, flight: f64| VerifyReport {
        ok: false,
        closure_residual: f64::INFINITY,
        max_flight_error: flight,
        detail: Some(detail),
    };
    for k in 0..n {
        let target = &phase[(k + 1) % n];
        match billiard_map(&phase[k], table) {
            Ok(MapStep::Bounce { next, flight_time }) => {
                if next.obstacle_id != target.obstacle_id {
                    return fail(
                        format!(
                            "bounce {k}: hit obstacle {} instead of {}",
                            next.obstacle_id, target.obstacle_id
                        ),
                        max_flight_error,
                    );
                }
                max_flight_error =
                    max_flight_error.max((flight_time - orbit.segment_lengths[k]).abs());
                let dp = next.position(table) - target.position(table);
                let dv = next.direction - target.direction;
                closure_residual = closure_residual.max((dp.norm_squared() + dv.norm_squared()).sqrt());
            }
            Ok(MapStep::Escape) => return fail(format!("escaped after bounce {k}"), max_flight_error),
            Err(e) => return fail(format!("bounce {k}: {e}"), max_flight_error),
        }
    }
    let ok = closure_residual <= CLOSURE_TOL && max_flight_error <= FLIGHT_TOL;
    VerifyReport {
        ok,
        closure_residual,
        max_flight_error,
        detail: (!ok).then(|| {
            format!("closure residual {closure_residual:e}, flight error {max_flight_error:e}")
        }),
    }
}

/// Free run of the billiard map for one period from bounce 0; returns the
/// distance to the start, or `None` if the run escapes or hits a different
/// obstacle. For unstable orbits this grows like `e^{λ}` times round-off.
pub fn free_run_residual(orbit: &PeriodicOrbit, table: &BilliardTable) -> Option<f64> {
    let letters = orbit.word.letters();
    let n = letters.len();
    let start = orbit.phase_point(0, table);
    let mut z = start;
    for k in 0..n {
        let (next, _) = billiard_map(&z, table).ok()?.bounce()?;
        if next.obstacle_id != letters[(k + 1) % n] {
            return None;
        }
        z = next;
    }
    let dp = z.position(table) - start.position(table);
    let dv = z.direction - start.direction;
    Some((dp.norm_squared() + dv.norm_squared()).sqrt())
}

/// Monodromy trace and Lyapunov exponent of a solved orbit.
pub fn orbit_stability(
    orbit: &PeriodicOrbit,
    table: &BilliardTable,
) -> Result<StabilityData, SolverError> {
    CycleGeometry::new(orbit.word.letters(), &orbit.angles, table)?.stability(table)
}

/// Stability of the `k`-th iterate, by repeating the bounce sequence.
pub fn iterate_stability(
    orbit: &PeriodicOrbit,
    k: usize,
    table: &BilliardTable,
) -> Result<StabilityData, SolverError> {
    let letters: Vec<Letter> = orbit.word.letters().repeat(k);
    let angles: Vec<f64> = orbit.angles.repeat(k);
    CycleGeometry::new(&letters, &angles, table)?.stability(table)
}

/// Smallest eigenvalue of the length Hessian at the orbit.
pub fn hessian_min_eigenvalue(
    orbit: &PeriodicOrbit,
    table: &BilliardTable,
) -> Result<f64, SolverError> {
    let eval = length_functional(&orbit.angles, orbit.word.letters(), table)?;
    let eig = eval.hessian.to_dense().symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}
