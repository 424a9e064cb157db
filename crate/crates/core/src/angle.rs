//! Angle helpers and numerical tolerances.

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Wraps an angle into (-pi, pi].
pub fn normalize(x: f64) -> f64 {
    if x > -PI && x <= PI {
        return x;
    }
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Signed difference `a - b` wrapped into (-pi, pi].
pub fn wrapped_diff(a: f64, b: f64) -> f64 {
    normalize(a - b)
}

pub fn deg4(a: [f64; 4]) -> [f64; 4] {
    a.map(f64::to_degrees)
}

pub fn rad4(a: [f64; 4]) -> [f64; 4] {
    a.map(f64::to_radians)
}

/// Every tolerance used by the library. All values are absolute radians
/// (or relative lengths for `rigid` and `layout`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Sector-angle sums and class equalities.
    pub angle: f64,
    /// Near-miss band: sums this close to a class boundary are reported.
    pub class_band: f64,
    /// Allowed overshoot of an arccos argument before it counts as outside the domain.
    pub clamp: f64,
    /// Bisection termination width.
    pub root: f64,
    /// Agreement of evaluated fold angles.
    pub eval: f64,
    /// Unit side-crease residual.
    pub unit: f64,
    /// Cut-crease compatibility residual.
    pub compat: f64,
    /// Fold angles below this are reported as flat.
    pub flat: f64,
    /// Relative edge-length error in a realized state.
    pub rigid: f64,
    /// Loop-closure residual.
    pub closure: f64,
    /// Layout reproduction of sector angles.
    pub layout: f64,
    /// Parallel crease detection.
    pub dir: f64,
    /// Sweeps stop this far short of a fold angle of +-pi, where panels meet.
    pub full_fold: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            angle: 1e-9,
            class_band: 1e-6,
            clamp: 1e-12,
            root: 1e-10,
            eval: 1e-9,
            unit: 1e-8,
            compat: 1e-8,
            flat: 1e-9,
            rigid: 1e-9,
            closure: 1e-9,
            layout: 1e-9,
            dir: 1e-9,
            full_fold: 1e-6,
        }
    }
}
