use serde::{Deserialize, Serialize};

use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::root::brent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

/// Ray `base + s·direction`, `s ≥ 0`, crossed in a given rotational sense.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub base: [f64; 2],
    pub direction: [f64; 2],
    pub orientation: Orientation,
}

impl Section {
    pub fn new(base: [f64; 2], direction: [f64; 2], orientation: Orientation) -> Result<Self> {
        let n = direction[0].hypot(direction[1]);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("section direction must be nonzero".into()));
        }
        Ok(Self {
            base,
            direction: [direction[0] / n, direction[1] / n],
            orientation,
        })
    }

    /// Signed distance of `p` from the section line (positive to the left).
    pub fn signed_distance(&self, p: [f64; 2]) -> f64 {
        let (dx, dy) = (p[0] - self.base[0], p[1] - self.base[1]);
        self.direction[0] * dy - self.direction[1] * dx
    }

    pub fn along(&self, p: [f64; 2]) -> f64 {
        self.direction[0] * (p[0] - self.base[0]) + self.direction[1] * (p[1] - self.base[1])
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CrossingSequence {
    pub coords: Vec<f64>,
    pub times: Vec<f64>,
}

pub fn section_crossings(tr: &Trajectory, sec: &Section) -> Result<CrossingSequence> {
    let mut out = CrossingSequence::default();
    let want_up = sec.orientation == Orientation::Positive;
    for w in tr.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let sa = sec.signed_distance([a[1], a[2]]);
        let sb = sec.signed_distance([b[1], b[2]]);
        let crosses = if want_up {
            sa < 0.0 && sb >= 0.0
        } else {
            sa > 0.0 && sb <= 0.0
        };
        if !crosses {
            continue;
        }
        let t = if sb == 0.0 {
            b[0]
        } else {
            brent(|t| sec.signed_distance(tr.eval(t)), a[0], b[0], 1e-15, 200)?
        };
        let p = tr.eval(t);
        if sec.along(p) < 0.0 {
            continue;
        }
        if out.times.last().is_some_and(|&tl| t <= tl) {
            continue;
        }
        out.times.push(t);
        out.coords.push(sec.along(p));
    }
    if out.coords.is_empty() {
        return Err(Error::NoCrossings);
    }
    Ok(out)
}
