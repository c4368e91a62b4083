//! Smooth cutoff weights on the Birkhoff coordinates of `∂D₀`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("window config: {0}")]
    Parse(String),
    #[error("window {index}: {msg}")]
    Invalid { index: usize, msg: String },
}

/// One box-shaped window. The weight is 1 on the inner `plateau` fraction of
/// each half-width and falls smoothly to 0 at the box edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    #[serde(default)]
    pub obstacle: u8,
    pub s_center: f64,
    pub s_halfwidth: f64,
    pub p_center: f64,
    pub p_halfwidth: f64,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
}

fn default_plateau() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffWindow {
    #[serde(default)]
    pub windows: Vec<Window>,
    #[serde(default)]
    pub constant_one: bool,
}

/// `exp(−1/x)` for `x > 0`, else 0.
fn f(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

/// Smooth step from 1 at `y ≤ 0` to 0 at `y ≥ 1`.
fn step_down(y: f64) -> f64 {
    let a = f(1.0 - y);
    let b = f(y);
    a / (a + b)
}

fn profile(x: f64, plateau: f64) -> f64 {
    let x = x.abs();
    if x >= 1.0 {
        0.0
    } else if x <= plateau {
        1.0
    } else {
        step_down((x - plateau) / (1.0 - plateau))
    }
}

impl Window {
    /// Weight at `(s, p)` on a boundary of length `circumference`.
    pub fn weight(&self, s: f64, p: f64, circumference: f64) -> f64 {
        let half = 0.5 * circumference;
        let ds = (s - self.s_center + half).rem_euclid(circumference) - half;
        profile(ds / self.s_halfwidth, self.plateau)
            * profile((p - self.p_center) / self.p_halfwidth, self.plateau)
    }

    /// Window equal to 1 on the box `[s_lo, s_hi] × [p_lo, p_hi]`, with the
    /// transition band of relative width `margin` outside it.
    pub fn covering(s_lo: f64, s_hi: f64, p_lo: f64, p_hi: f64, margin: f64) -> Self {
        let plateau = 1.0 / (1.0 + margin);
        Self {
            obstacle: 0,
            s_center: 0.5 * (s_lo + s_hi),
            s_halfwidth: 0.5 * (s_hi - s_lo).max(f64::MIN_POSITIVE) / plateau,
            p_center: 0.5 * (p_lo + p_hi),
            p_halfwidth: 0.5 * (p_hi - p_lo).max(f64::MIN_POSITIVE) / plateau,
            plateau,
        }
    }
}

impl CutoffWindow {
    pub fn one() -> Self {
        Self {
            windows: Vec::new(),
            constant_one: true,
        }
    }

    pub fn from_windows(windows: Vec<Window>) -> Self {
        Self {
            windows,
            constant_one: false,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, WindowError> {
        let w: Self = toml::from_str(text).map_err(|e| WindowError::Parse(e.to_string()))?;
        w.check()?;
        Ok(w)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("window config serializes")
    }

    pub fn check(&self) -> Result<(), WindowError> {
        for (index, w) in self.windows.iter().enumerate() {
            let bad = |msg: &str| WindowError::Invalid {
                index,
                msg: msg.to_string(),
            };
            if w.obstacle != 0 {
                return Err(bad("windows live on obstacle 0"));
            }
            if !(w.s_halfwidth > 0.0 && w.p_halfwidth > 0.0) {
                return Err(bad("half-widths must be positive"));
            }
            if !(0.0..1.0).contains(&w.plateau) {
                return Err(bad("plateau must lie in [0, 1)"));
            }
        }
        Ok(())
    }

    /// `ρ(s, p) ∈ [0, 1]`; overlapping windows combine as `1 − Π(1 − ρᵢ)`.
    pub fn rho(&self, s: f64, p: f64, circumference: f64) -> f64 {
        if self.constant_one {
            return 1.0;
        }
        1.0 - self
            .windows
            .iter()
            .map(|w| 1.0 - w.weight(s, p, circumference))
            .product::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn sample() -> Window {
        Window {
            obstacle: 0,
            s_center: 1.0,
            s_halfwidth: 0.5,
            p_center: 0.0,
            p_halfwidth: 0.4,
            plateau: 0.5,
        }
    }

    #[test]
    fn weight_is_one_inside_and_zero_outside() {
        let w = sample();
        assert_eq!(w.weight(1.1, 0.1, TAU), 1.0);
        assert_eq!(w.weight(1.6, 0.0, TAU), 0.0);
        assert_eq!(w.weight(1.0, 0.41, TAU), 0.0);
        let mid = w.weight(1.35, 0.0, TAU);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn step_is_smooth_and_monotone() {
        let mut last = 1.0;
        for i in 0..=1000 {
            let v = step_down(i as f64 / 1000.0);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= last + 1e-15);
            last = v;
        }
        assert!((step_down(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn s_wraps_around_the_boundary() {
        let w = Window { s_center: 0.1, ..sample() };
        assert_eq!(w.weight(TAU - 0.05, 0.0, TAU), 1.0);
    }

    #[test]
    fn combined_windows_stay_in_range() {
        let rho = CutoffWindow::from_windows(vec![sample(), Window { s_center: 1.2, ..sample() }]);
        for i in 0..200 {
            let s = i as f64 * 0.03;
            let v = rho.rho(s, 0.05, TAU);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= sample().weight(s, 0.05, TAU) - 1e-15);
        }
    }

    #[test]
    fn covering_window_is_one_on_its_box() {
        let w = Window::covering(0.2, 0.9, -0.3, 0.5, 0.2);
        for (s, p) in [(0.2, -0.3), (0.9, 0.5), (0.5, 0.0)] {
            assert!((w.weight(s, p, TAU) - 1.0).abs() < 1e-12);
        }
        assert_eq!(w.weight(1.2, 0.0, TAU), 0.0);
    }

    #[test]
    fn config_round_trip() {
        let cfg = CutoffWindow::from_windows(vec![sample()]);
        let back = CutoffWindow::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
        assert!(CutoffWindow::from_toml_str("[[windows]]\nobstacle = 2\ns_center = 0\ns_halfwidth = 1\np_center = 0\np_halfwidth = 1\n").is_err());
    }
}
