//! Snapping dimension estimates onto the discrete value sets that carry
//! cyclicity bounds.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::DimensionEstimate;
use crate::error::{Error, Result};

pub const DEFAULT_GATE: f64 = 0.04;
pub const MAX_GATE: f64 = 0.06;
/// Largest lattice index a numerical estimate may be snapped to.
pub const MAX_INDEX: u32 = 10;

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lattice {
    /// {(2j+1)/(2j+3)} ∪ {1}
    Hopf,
    /// {j/(j+1)} ∪ {1}
    Canard,
    Unrestricted,
}

impl Lattice {
    /// Lattice point of index j (None for `Unrestricted`).
    pub fn point(self, j: u32) -> Option<Rational> {
        let j = j as i64;
        match self {
            Lattice::Hopf => Some(Rational::new(2 * j + 1, 2 * j + 3)),
            Lattice::Canard => Some(Rational::new(j, j + 1)),
            Lattice::Unrestricted => None,
        }
    }

    /// Index of a lattice value below 1, if it is one.
    pub fn index_of(self, d: Rational) -> Option<u32> {
        if d >= Rational::from_integer(1) || d < Rational::from_integer(0) {
            return None;
        }
        let j = match self {
            // d = (2j+1)/(2j+3)  ⇔  j = (3d − 1)/(2(1 − d))
            Lattice::Hopf => (d * 3 - 1) / ((Rational::from_integer(1) - d) * 2),
            // d = j/(j+1)  ⇔  j = d/(1 − d)
            Lattice::Canard => d / (Rational::from_integer(1) - d),
            Lattice::Unrestricted => return None,
        };
        (j.is_integer() && *j.numer() >= 0).then(|| *j.numer() as u32)
    }

    /// Cyclicity bound at a lattice value: (d+1)/(2(1−d)) for Hopf,
    /// (2−d)/(1−d) for Canard, unbounded at 1.
    pub fn bound(self, d: Rational) -> Result<Bound> {
        let one = Rational::from_integer(1);
        if d == one {
            return Ok(Bound::Unbounded);
        }
        if self.index_of(d).is_none() {
            return Err(Error::Domain(format!(
                "{d} is not a point of the {self} lattice"
            )));
        }
        let b = match self {
            Lattice::Hopf => (d + one) / ((one - d) * 2),
            Lattice::Canard => (Rational::from_integer(2) - d) / (one - d),
            Lattice::Unrestricted => unreachable!("index_of rejects unrestricted"),
        };
        debug_assert!(b.is_integer());
        Ok(Bound::AtMost(*b.numer() as u32))
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Lattice::Hopf => "hopf",
            Lattice::Canard => "canard",
            Lattice::Unrestricted => "unrestricted",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Bound {
    AtMost(u32),
    /// Dimension 1: no bound follows from the dimension.
    Unbounded,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::AtMost(n) => write!(f, "{n}"),
            Bound::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub lattice: Lattice,
    pub snapped: Rational,
    /// None for the value 1.
    pub index_j: Option<u32>,
    pub residual: f64,
    pub cyclicity_bound: Bound,
}

fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Nearest lattice point within `gate`; refuses ties inside the gate and
/// indices above [`MAX_INDEX`].
pub fn snap_to_lattice(d: &DimensionEstimate, lat: Lattice, gate: f64) -> Result<Classification> {
    snap_value(d.value, lat, gate)
}

pub fn snap_value(v: f64, lat: Lattice, gate: f64) -> Result<Classification> {
    if !(gate > 0.0 && gate <= MAX_GATE) {
        return Err(Error::Domain(format!(
            "gate {gate} outside (0, {MAX_GATE}]"
        )));
    }
    if !v.is_finite() {
        return Err(Error::Domain("non-finite estimate".into()));
    }
    if lat == Lattice::Unrestricted {
        return Err(Error::Domain(
            "the unrestricted family has no lattice to snap to".into(),
        ));
    }
    let amb = |reason: String| Error::Ambiguous {
        estimate: v,
        reason,
    };
    // candidates up to the index where spacing drops well below any gate
    let mut cands: Vec<(Rational, Option<u32>)> = (0..=200)
        .map(|j| (lat.point(j).expect("lattice point"), Some(j)))
        .collect();
    cands.push((Rational::from_integer(1), None));
    let mut dist: Vec<(f64, Rational, Option<u32>)> = cands
        .into_iter()
        .map(|(r, j)| ((v - to_f64(r)).abs(), r, j))
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (res, snapped, j) = dist[0];
    if res > gate {
        return Err(amb(format!(
            "nearest {lat} point {snapped} is {res:.4} away (gate {gate})"
        )));
    }
    if dist[1].0 <= gate {
        return Err(amb(format!(
            "both {} and {} lie within the gate {gate}",
            snapped, dist[1].1
        )));
    }
    if let Some(j) = j {
        if j > MAX_INDEX {
            return Err(amb(format!("lattice index {j} above {MAX_INDEX}")));
        }
    }
    Ok(Classification {
        lattice: lat,
        snapped,
        index_j: j,
        residual: res,
        cyclicity_bound: lat.bound(snapped)?,
    })
}
