//! Ray tracing, the reflection law and the billiard boundary map.
//!
//! Speed is 1, so every flight time equals the Euclidean segment length.

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;

use crate::geometry::{boundary_point, BilliardTable, Disk, Vec2};
use crate::symbolic::Letter;

/// Hits closer than this to the ray origin are self-hits.
pub const SELF_HIT_TOL: f64 = 1e-12;
/// `|⟨v, n⟩|` below this at a reflection is a glancing collision.
pub const GLANCING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("ray is not incoming: <v, n> = {0}")]
    NotIncoming(f64),
    #[error("glancing collision on obstacle {obstacle}: |<v, n>| = {cos}")]
    Glancing { obstacle: Letter, cos: f64 },
    #[error("phase point direction does not point out of obstacle {0}")]
    NotOutgoing(Letter),
    #[error("glancing incidence at bounce {index}: |cos φ| = {cos}")]
    GlancingBounce { index: usize, cos: f64 },
}

/// Outgoing unit vector on the boundary of an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub obstacle_id: Letter,
    pub theta: f64,
    pub direction: Vec2,
}

impl PhasePoint {
    pub fn new(obstacle_id: Letter, theta: f64, direction: Vec2) -> Self {
        Self {
            obstacle_id,
            theta,
            direction,
        }
    }

    pub fn position(&self, table: &BilliardTable) -> Vec2 {
        boundary_point(table.disk(self.obstacle_id), self.theta).0
    }

    pub fn normal(&self) -> Vec2 {
        Vec2::new(self.theta.cos(), self.theta.sin())
    }

    /// Inverse of [`birkhoff_coords`]: rebuild the phase point from `(s, sin φ)`.
    pub fn from_birkhoff(disk: &Disk, s: f64, p: f64) -> Self {
        let theta = s / disk.radius;
        let n = Vec2::new(theta.cos(), theta.sin());
        let t = Vec2::new(-n.y, n.x);
        let cos_phi = (1.0 - p * p).max(0.0).sqrt();
        Self {
            obstacle_id: disk.id,
            theta,
            direction: cos_phi * n + p * t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub obstacle_id: Letter,
    pub theta: f64,
    pub point: Vec2,
    pub flight_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MapStep {
    Bounce { next: PhasePoint, flight_time: f64 },
    Escape,
}

impl MapStep {
    pub fn bounce(self) -> Option<(PhasePoint, f64)> {
        match self {
            MapStep::Bounce { next, flight_time } => Some((next, flight_time)),
            MapStep::Escape => None,
        }
    }
}

/// Specular reflection `w = v − 2⟨v, n⟩n` of an incoming ray.
pub fn reflect(v: Vec2, n: Vec2) -> Result<Vec2, DynamicsError> {
    let vn = v.dot(&n);
    if vn >= 0.0 {
        return Err(DynamicsError::NotIncoming(vn));
    }
    Ok(v - 2.0 * vn * n)
}

/// Smallest positive ray parameter at which the ray meets the disk boundary.
fn ray_disk(origin: Vec2, dir: Vec2, disk: &Disk) -> Option<f64> {
    let rel = origin - disk.center;
    let b = dir.dot(&rel);
    let c = rel.norm_squared() - disk.radius * disk.radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    // q-form of the quadratic t² + 2bt + c = 0.
    let q = -(b + b.signum() * disc.sqrt());
    let (t1, t2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        let r1 = q;
        let r2 = c / q;
        (r1.min(r2), r1.max(r2))
    };
    [t1, t2].into_iter().find(|&t| t > SELF_HIT_TOL)
}

/// First obstacle boundary met by the ray, or `None` when it escapes.
///
/// A hit on `exclude` closer than [`SELF_HIT_TOL`] to the origin is a
/// re-hit of the departure point and is skipped like any other self-hit.
pub fn next_hit(
    origin: Vec2,
    dir: Vec2,
    table: &BilliardTable,
    exclude: Option<Letter>,
) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for disk in table.obstacles() {
        let Some(t) = ray_disk(origin, dir, disk) else {
            continue;
        };
        if Some(disk.id) == exclude && t <= SELF_HIT_TOL {
            continue;
        }
        if best.is_none_or(|h| t < h.flight_time) {
            let point = origin + t * dir;
            let rel = point - disk.center;
            best = Some(Hit {
                obstacle_id: disk.id,
                theta: rel.y.atan2(rel.x),
                point,
                flight_time: t,
            });
        }
    }
    best
}

/// One step of the billiard map: fly to the next obstacle and reflect.
pub fn billiard_map(z: &PhasePoint, table: &BilliardTable) -> Result<MapStep, DynamicsError> {
    let normal = z.normal();
    if z.direction.dot(&normal) <= 0.0 {
        return Err(DynamicsError::NotOutgoing(z.obstacle_id));
    }
    let origin = z.position(table);
    let Some(hit) = next_hit(origin, z.direction, table, Some(z.obstacle_id)) else {
        return Ok(MapStep::Escape);
    };
    let n = Vec2::new(hit.theta.cos(), hit.theta.sin());
    let cos = z.direction.dot(&n);
    if cos.abs() < GLANCING_TOL {
        return Err(DynamicsError::Glancing {
            obstacle: hit.obstacle_id,
            cos: cos.abs(),
        });
    }
    let direction = reflect(z.direction, n)?;
    Ok(MapStep::Bounce {
        next: PhasePoint::new(hit.obstacle_id, hit.theta, direction),
        flight_time: hit.flight_time,
    })
}

/// Birkhoff coordinates `(s, sin φ)`: arclength `s = radius·θ` with θ in
/// `[0, 2π)`, and φ the counterclockwise angle from the normal to the direction.
pub fn birkhoff_coords(z: &PhasePoint, disk: &Disk) -> (f64, f64) {
    let n = z.normal();
    let p = n.x * z.direction.y - n.y * z.direction.x;
    (disk.radius * z.theta.rem_euclid(TAU), p)
}

/// Wrap an angle to `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityData {
    pub monodromy_trace: f64,
    pub lyapunov_per_period: f64,
    pub hyperbolic: bool,
}

impl StabilityData {
    pub fn from_trace(trace: f64) -> Self {
        let hyperbolic = trace.abs() > 2.0;
        let lyapunov_per_period = if hyperbolic {
            ((trace.abs() + (trace * trace - 4.0).sqrt()) / 2.0).ln()
        } else {
            0.0
        };
        Self {
            monodromy_trace: trace,
            lyapunov_per_period,
            hyperbolic,
        }
    }
}

/// Linearization data for one bounce: flight length to the next bounce,
/// curvature at the next bounce and the cosine of its incidence angle.
#[derive(Debug, Clone, Copy)]
pub struct BounceLink {
    pub flight: f64,
    pub curvature: f64,
    pub cos_incidence: f64,
}

/// Ordered product of free-flight `[[1, ℓ], [0, 1]]` and reflection
/// `[[1, 0], [2κ/cos φ, 1]]` matrices around the cycle.
pub fn monodromy(links: &[BounceLink]) -> Result<Matrix2<f64>, DynamicsError> {
    let mut m = Matrix2::identity();
    for (index, link) in links.iter().enumerate() {
        if link.cos_incidence.abs() < GLANCING_TOL {
            return Err(DynamicsError::GlancingBounce {
                index,
                cos: link.cos_incidence.abs(),
            });
        }
        let flight = Matrix2::new(1.0, link.flight, 0.0, 1.0);
        let reflection = Matrix2::new(
            1.0,
            0.0,
            2.0 * link.curvature / link.cos_incidence,
            1.0,
        );
        m = reflection * flight * m;
    }
    Ok(m)
}
