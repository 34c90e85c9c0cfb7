//! Closed-form planar spirals.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::flow::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum ClosedSpiralKind {
    /// r = φ^{−α}, φ ≥ 1.
    PowerSpiral { alpha: f64 },
    /// r = e^{−βφ}.
    ExpSpiral { beta: f64 },
    /// Planar projection r = (1 + |b₂|s)^{−a₁/b₂}, angle 1 − sgn(b₂)s, of the
    /// three-dimensional family with unit integration constants.
    ThreeD { a1: f64, b2: f64 },
}

impl ClosedSpiralKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ClosedSpiralKind::PowerSpiral { alpha } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return Err(Error::Domain(format!(
                        "power spiral needs alpha in (0,1], got {alpha}"
                    )));
                }
            }
            ClosedSpiralKind::ExpSpiral { beta } => {
                if beta == 0.0 || !beta.is_finite() {
                    return Err(Error::Domain("exponential spiral needs beta != 0".into()));
                }
            }
            ClosedSpiralKind::ThreeD { a1, b2 } => {
                if b2 == 0.0 || !b2.is_finite() || !a1.is_finite() {
                    return Err(Error::Domain(
                        "3D spiral needs finite a1 and b2 != 0".into(),
                    ));
                }
                let ratio = a1 / b2;
                if ratio <= 0.0 {
                    return Err(Error::NotAccumulating { ratio });
                }
            }
        }
        Ok(())
    }

    pub fn radius(&self, s: f64) -> f64 {
        match *self {
            ClosedSpiralKind::PowerSpiral { alpha } => s.powf(-alpha),
            ClosedSpiralKind::ExpSpiral { beta } => (-beta * s).exp(),
            ClosedSpiralKind::ThreeD { a1, b2 } => (1.0 + b2.abs() * s).powf(-a1 / b2),
        }
    }

    fn dradius(&self, s: f64) -> f64 {
        match *self {
            ClosedSpiralKind::PowerSpiral { alpha } => -alpha * s.powf(-alpha - 1.0),
            ClosedSpiralKind::ExpSpiral { beta } => -beta * (-beta * s).exp(),
            ClosedSpiralKind::ThreeD { a1, b2 } => {
                let e = -a1 / b2;
                e * b2.abs() * (1.0 + b2.abs() * s).powf(e - 1.0)
            }
        }
    }

    pub fn angle(&self, s: f64) -> f64 {
        match *self {
            ClosedSpiralKind::ThreeD { b2, .. } => 1.0 - b2.signum() * s,
            _ => s,
        }
    }

    fn dangle(&self) -> f64 {
        match *self {
            ClosedSpiralKind::ThreeD { b2, .. } => -b2.signum(),
            _ => 1.0,
        }
    }

    pub fn point(&self, s: f64) -> [f64; 2] {
        let r = self.radius(s);
        let a = self.angle(s);
        [r * a.cos(), r * a.sin()]
    }

    /// |dγ/ds|.
    pub fn speed(&self, s: f64) -> f64 {
        let r = self.radius(s);
        r.hypot(self.dradius(s)) * self.dangle().abs()
    }

    pub fn min_parameter(&self) -> f64 {
        match self {
            ClosedSpiralKind::PowerSpiral { .. } => 1.0,
            ClosedSpiralKind::ThreeD { .. } => 0.0,
            ClosedSpiralKind::ExpSpiral { .. } => f64::NEG_INFINITY,
        }
    }
}

/// Samples a closed-form spiral over the parameter range with at least
/// `samples_per_turn` points per turn; the returned trajectory keeps the
/// formula so estimators can refine it further.
pub fn closed_spiral(
    kind: ClosedSpiralKind,
    range: (f64, f64),
    samples_per_turn: usize,
) -> Result<Trajectory> {
    kind.validate()?;
    let (lo, hi) = range;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("empty parameter range [{lo}, {hi}]")));
    }
    if lo < kind.min_parameter() {
        return Err(Error::Domain(format!(
            "parameter range starts at {lo}, below {}",
            kind.min_parameter()
        )));
    }
    let spt = samples_per_turn.max(1);
    let count = (((hi - lo) / TAU) * spt as f64).ceil().max(1.0) as usize;
    let points = (0..=count)
        .map(|i| {
            let s = if i == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / count as f64
            };
            let p = kind.point(s);
            [s, p[0], p[1]]
        })
        .collect();
    let turns = (kind.angle(hi) - kind.angle(lo)).abs() / TAU;
    Ok(Trajectory::analytic(kind, points, turns))
}
