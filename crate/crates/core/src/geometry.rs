//! Obstacle configurations and the standing assumptions on them.
//!
//! Obstacles are disks. A table carries its obstacles sorted by id; ids are
//! contiguous and start either at 0 (the table has a distinguished obstacle
//! `D₀`) or at 1 (a table without one, e.g. the sub-billiard `{D₁, …, D_r}`).

use std::fmt;
use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::symbolic::Letter;

pub type Vec2 = Vector2<f64>;

/// Margins below this are treated as violations of the non-eclipse condition.
pub const ECLIPSE_MARGIN_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("table needs at least 2 obstacles, got {0}")]
    TooFewObstacles(usize),
    #[error("obstacle {id}: radius must be positive and finite, got {radius}")]
    BadRadius { id: Letter, radius: f64 },
    #[error("obstacle {id}: center must be finite")]
    BadCenter { id: Letter },
    #[error("obstacle ids must be unique and contiguous from 0 or 1, got {0:?}")]
    BadIds(Vec<Letter>),
    #[error("table configuration: {0}")]
    Parse(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("table violates the standing assumptions: {0}")]
    Assumptions(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub id: Letter,
    pub center: Vec2,
    pub radius: f64,
}

impl Disk {
    pub fn new(id: Letter, center: [f64; 2], radius: f64) -> Self {
        Self {
            id,
            center: Vec2::new(center[0], center[1]),
            radius,
        }
    }

    pub fn circumference(&self) -> f64 {
        std::f64::consts::TAU * self.radius
    }

    /// Signed distance between the two boundaries (negative when they overlap).
    pub fn gap(&self, other: &Disk) -> f64 {
        (self.center - other.center).norm() - self.radius - other.radius
    }
}

/// Point on the boundary at angle `theta` together with the outward normal.
pub fn boundary_point(disk: &Disk, theta: f64) -> (Vec2, Vec2) {
    let normal = Vec2::new(theta.cos(), theta.sin());
    (disk.center + disk.radius * normal, normal)
}

/// Exact Euclidean distance from `p` to the convex hull of two disks.
///
/// The hull is the union of the interpolated disks `B(c(t), r(t))`,
/// `t ∈ [0, 1]`, so the distance is the minimum of the convex function
/// `t ↦ |p − c(t)| − r(t)`, which has a closed-form minimizer.
pub fn hull_distance(d1: &Disk, d2: &Disk, p: Vec2) -> f64 {
    let axis = d2.center - d1.center;
    let len = axis.norm();
    let f = |t: f64| {
        let c = d1.center + t * axis;
        let r = (1.0 - t) * d1.radius + t * d2.radius;
        (p - c).norm() - r
    };
    if len == 0.0 {
        return f(0.0).min(f(1.0)).max(0.0);
    }
    let e = axis / len;
    let rel = p - d1.center;
    let along = rel.dot(&e);
    let across = (rel - along * e).norm();
    let kappa = (d2.radius - d1.radius) / len;
    let t_star = if kappa.abs() < 1.0 {
        let x = -kappa * across / (1.0 - kappa * kappa).sqrt();
        ((along - x) / len).clamp(0.0, 1.0)
    } else {
        // One disk contains the other; the hull is the larger disk.
        if d2.radius > d1.radius {
            1.0
        } else {
            0.0
        }
    };
    f(t_star).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EclipseTriple {
    pub hull: (Letter, Letter),
    pub obstacle: Letter,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub disjoint_ok: bool,
    pub min_gap: f64,
    pub closest_pair: Option<(Letter, Letter)>,
    pub non_eclipse_ok: bool,
    /// `min dist(center_k, conv(D_i ∪ D_j)) − radius_k` over ordered triples.
    pub min_eclipse_margin: f64,
    /// Same minimum without subtracting the obstacle radius.
    pub min_center_hull_distance: f64,
    pub offending_triples: Vec<(Letter, Letter, Letter)>,
    pub triples: Vec<EclipseTriple>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.disjoint_ok && self.non_eclipse_ok
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "disjoint_ok = {}", self.disjoint_ok)?;
        writeln!(f, "min_gap = {:.12}", self.min_gap)?;
        if let Some((i, j)) = self.closest_pair {
            writeln!(f, "closest_pair = [{i}, {j}]")?;
        }
        writeln!(f, "non_eclipse_ok = {}", self.non_eclipse_ok)?;
        writeln!(f, "min_eclipse_margin = {:.12}", self.min_eclipse_margin)?;
        writeln!(
            f,
            "min_center_hull_distance = {:.12}",
            self.min_center_hull_distance
        )?;
        write!(f, "offending_triples = [")?;
        for (n, (i, j, k)) in self.offending_triples.iter().enumerate() {
            if n > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[{i}, {j}, {k}]")?;
        }
        writeln!(f, "]")
    }
}

/// Check disjointness and the non-eclipse condition for every ordered triple.
pub fn validate_table(obstacles: &[Disk]) -> Result<ValidationReport, GeometryError> {
    if obstacles.len() < 2 {
        return Err(GeometryError::TooFewObstacles(obstacles.len()));
    }
    let mut min_gap = f64::INFINITY;
    let mut closest_pair = None;
    for (a, da) in obstacles.iter().enumerate() {
        for db in &obstacles[a + 1..] {
            let gap = da.gap(db);
            if gap < min_gap {
                min_gap = gap;
                closest_pair = Some((da.id, db.id));
            }
        }
    }
    let mut triples = Vec::new();
    for di in obstacles {
        for dj in obstacles {
            if di.id == dj.id {
                continue;
            }
            for dk in obstacles {
                if dk.id == di.id || dk.id == dj.id {
                    continue;
                }
                let margin = hull_distance(di, dj, dk.center) - dk.radius;
                triples.push(EclipseTriple {
                    hull: (di.id, dj.id),
                    obstacle: dk.id,
                    margin,
                });
            }
        }
    }
    let min_eclipse_margin = triples
        .iter()
        .map(|t| t.margin)
        .fold(f64::INFINITY, f64::min);
    let min_center_hull_distance = triples
        .iter()
        .map(|t| t.margin + obstacle_radius(obstacles, t.obstacle))
        .fold(f64::INFINITY, f64::min);
    let offending_triples = triples
        .iter()
        .filter(|t| t.margin < ECLIPSE_MARGIN_TOL)
        .map(|t| (t.hull.0, t.hull.1, t.obstacle))
        .collect::<Vec<_>>();
    Ok(ValidationReport {
        disjoint_ok: min_gap > 0.0,
        min_gap,
        closest_pair,
        non_eclipse_ok: offending_triples.is_empty(),
        min_eclipse_margin,
        min_center_hull_distance,
        offending_triples,
        triples,
    })
}

fn obstacle_radius(obstacles: &[Disk], id: Letter) -> f64 {
    obstacles
        .iter()
        .find(|d| d.id == id)
        .map(|d| d.radius)
        .unwrap_or(0.0)
}

#[derive(Debug, Clone)]
pub struct BilliardTable {
    obstacles: Vec<Disk>,
    validation: ValidationReport,
}

impl BilliardTable {
    pub fn new(mut obstacles: Vec<Disk>) -> Result<Self, GeometryError> {
        obstacles.sort_by_key(|d| d.id);
        let ids: Vec<Letter> = obstacles.iter().map(|d| d.id).collect();
        let first = ids.first().copied().unwrap_or(0);
        let contiguous = first <= 1
            && ids
                .iter()
                .enumerate()
                .all(|(k, &id)| id as usize == first as usize + k);
        if !contiguous {
            return Err(GeometryError::BadIds(ids));
        }
        for d in &obstacles {
            if !(d.radius.is_finite() && d.radius > 0.0) {
                return Err(GeometryError::BadRadius {
                    id: d.id,
                    radius: d.radius,
                });
            }
            if !(d.center.x.is_finite() && d.center.y.is_finite()) {
                return Err(GeometryError::BadCenter { id: d.id });
            }
        }
        let validation = validate_table(&obstacles)?;
        Ok(Self {
            obstacles,
            validation,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self, GeometryError> {
        let config: TableConfig =
            toml::from_str(text).map_err(|e| GeometryError::Parse(e.to_string()))?;
        let disks = config
            .obstacles
            .into_iter()
            .map(|o| Disk::new(o.id, o.center, o.radius))
            .collect();
        Self::new(disks)
    }

    pub fn from_path(path: &Path) -> Result<Self, GeometryError> {
        let text = std::fs::read_to_string(path).map_err(|source| GeometryError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        let config = TableConfig {
            obstacles: self
                .obstacles
                .iter()
                .map(|d| ObstacleConfig {
                    id: d.id,
                    center: [d.center.x, d.center.y],
                    radius: d.radius,
                })
                .collect(),
        };
        toml::to_string(&config).expect("table config serializes")
    }

    pub fn obstacles(&self) -> &[Disk] {
        &self.obstacles
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.validation
    }

    /// Fails unless the table is disjoint and satisfies non-eclipse.
    pub fn ensure_valid(&self) -> Result<(), GeometryError> {
        let v = &self.validation;
        if !v.disjoint_ok {
            let (i, j) = v.closest_pair.unwrap_or((0, 0));
            return Err(GeometryError::Assumptions(format!(
                "obstacles {i} and {j} overlap (gap {:.6})",
                v.min_gap
            )));
        }
        if !v.non_eclipse_ok {
            return Err(GeometryError::Assumptions(format!(
                "non-eclipse fails for triples {:?} (min margin {:.6})",
                v.offending_triples, v.min_eclipse_margin
            )));
        }
        Ok(())
    }

    pub fn disk(&self, id: Letter) -> &Disk {
        let first = self.obstacles[0].id;
        &self.obstacles[(id - first) as usize]
    }

    pub fn get(&self, id: Letter) -> Option<&Disk> {
        let first = self.obstacles[0].id;
        id.checked_sub(first)
            .and_then(|k| self.obstacles.get(k as usize))
    }

    pub fn has_distinguished(&self) -> bool {
        self.obstacles[0].id == 0
    }

    pub fn first_letter(&self) -> Letter {
        self.obstacles[0].id
    }

    pub fn last_letter(&self) -> Letter {
        self.obstacles[self.obstacles.len() - 1].id
    }

    pub fn alphabet_size(&self) -> usize {
        self.obstacles.len()
    }

    /// Smallest boundary gap between two obstacles, optionally ignoring `D₀`.
    ///
    /// Every billiard segment between distinct obstacles is at least this long.
    pub fn min_gap(&self, zero_free: bool) -> f64 {
        let disks: Vec<&Disk> = self
            .obstacles
            .iter()
            .filter(|d| !(zero_free && d.id == 0))
            .collect();
        let mut best = f64::INFINITY;
        for (a, da) in disks.iter().enumerate() {
            for db in &disks[a + 1..] {
                best = best.min(da.gap(db));
            }
        }
        best
    }

    /// `sup dist(x_i, x_j)` over points of distinct obstacles.
    pub fn max_boundary_distance(&self) -> f64 {
        let mut best: f64 = 0.0;
        for (a, da) in self.obstacles.iter().enumerate() {
            for db in &self.obstacles[a + 1..] {
                best = best.max((da.center - db.center).norm() + da.radius + db.radius);
            }
        }
        best
    }

    /// SHA-256 over the exact bit patterns of every obstacle.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for d in &self.obstacles {
            hasher.update([d.id]);
            hasher.update(d.center.x.to_bits().to_le_bytes());
            hasher.update(d.center.y.to_bits().to_le_bytes());
            hasher.update(d.radius.to_bits().to_le_bytes());
        }
        hex::encode(hasher.finalize())
    }

    /// Similarity transform: every coordinate and radius multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GeometryError> {
        Self::new(
            self.obstacles
                .iter()
                .map(|d| Disk {
                    id: d.id,
                    center: d.center * factor,
                    radius: d.radius * factor,
                })
                .collect(),
        )
    }

    /// Copy without the distinguished obstacle.
    pub fn without_distinguished(&self) -> Result<Self, GeometryError> {
        Self::new(
            self.obstacles
                .iter()
                .filter(|d| d.id != 0)
                .copied()
                .collect(),
        )
    }

    /// Unit disks at the vertices of an equilateral triangle, ids 1..=3.
    pub fn equilateral_three_disk(side: f64, radius: f64) -> Self {
        let h = side * 3f64.sqrt() / 2.0;
        Self::new(vec![
            Disk::new(1, [0.0, 0.0], radius),
            Disk::new(2, [side, 0.0], radius),
            Disk::new(3, [side / 2.0, h], radius),
        ])
        .expect("equilateral table is well formed")
    }

    /// Disks at the corners of a square, ids 0..=3 with `D₀` at the origin.
    pub fn square_four_disk(side: f64, radius: f64) -> Self {
        Self::new(vec![
            Disk::new(0, [0.0, 0.0], radius),
            Disk::new(1, [side, 0.0], radius),
            Disk::new(2, [side, side], radius),
            Disk::new(3, [0.0, side], radius),
        ])
        .expect("square table is well formed")
    }

    /// Two disks on the x-axis, ids 1 and 2.
    pub fn two_disk(separation: f64, radius: f64) -> Self {
        Self::new(vec![
            Disk::new(1, [0.0, 0.0], radius),
            Disk::new(2, [separation, 0.0], radius),
        ])
        .expect("two-disk table is well formed")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableConfig {
    obstacles: Vec<ObstacleConfig>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObstacleConfig {
    id: Letter,
    center: [f64; 2],
    radius: f64,
}
