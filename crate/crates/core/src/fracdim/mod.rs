//! Minkowski dimension estimators for planar curves and monotone sequences,
//! plus snapping of estimates onto the cyclicity lattices.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::numerics::fit::{fine_window, LineFit};

pub mod curve;
pub mod lattice;
pub mod sector;
pub mod sequence;

pub use curve::{curve_box_dim, curve_sausage_dim, spiral_grid, SausageOptions};
pub use lattice::{
    snap_to_lattice, snap_value, Bound, Classification, Lattice, Rational, DEFAULT_GATE, MAX_INDEX,
};
pub use sector::{sector_dim, sector_ln_area, PowerLawSpiral, SectorOptions, TrigShape};
pub use sequence::{
    neighbourhood_length, seq_box_dim, seq_gap_dim, seq_gap_dim_on, seq_order_dim, MonotoneSequence,
};

pub const MIN_SCALES: usize = 12;
pub const MIN_WINDOW: usize = 6;

/// Geometric grid δ_j = δ_max·ratio^j down to δ_min.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub delta_max: f64,
    pub delta_min: f64,
    pub ratio: f64,
}

impl ScaleGrid {
    pub fn new(delta_max: f64, delta_min: f64, ratio: f64) -> Result<Self> {
        if !(delta_min > 0.0 && delta_min < delta_max && delta_max.is_finite()) {
            return Err(Error::Domain(format!(
                "scale grid needs 0 < delta_min < delta_max, got [{delta_min:e}, {delta_max:e}]"
            )));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Domain(format!("scale ratio {ratio} outside (0, 1)")));
        }
        let g = Self {
            delta_max,
            delta_min,
            ratio,
        };
        if g.len() < MIN_SCALES {
            return Err(Error::Domain(format!(
                "scale grid has {} scales, need at least {MIN_SCALES}",
                g.len()
            )));
        }
        Ok(g)
    }

    /// Grid with exactly `count` scales from `delta_max` to `delta_min`.
    pub fn spanning(delta_max: f64, delta_min: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::Domain("scale grid needs at least two scales".into()));
        }
        let ratio = (delta_min / delta_max).powf(1.0 / (count - 1) as f64);
        Self::new(delta_max, delta_min, ratio)
    }

    pub fn len(&self) -> usize {
        let n = (self.delta_min / self.delta_max).ln() / self.ratio.ln();
        (n + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta_min(&self) -> f64 {
        self.scales().last().copied().unwrap_or(self.delta_max)
    }

    /// Scales from coarse to fine.
    pub fn scales(&self) -> Vec<f64> {
        (0..self.len())
            .map(|j| self.delta_max * self.ratio.powi(j as i32))
            .collect()
    }

    /// Same grid rescaled by `s` (for similarity-transformed data).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            delta_max: self.delta_max * s,
            delta_min: self.delta_min * s,
            ratio: self.ratio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    BoxCount,
    Sausage,
    GapStructure,
    ReturnOrder,
    Sector,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::BoxCount => "box",
            Method::Sausage => "sausage",
            Method::GapStructure => "gap",
            Method::ReturnOrder => "order",
            Method::Sector => "sector",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub stderr: f64,
    /// `(δ_lo, δ_hi)` of the fitted window.
    pub fit_window: (f64, f64),
    pub r2: f64,
    pub method: Method,
    /// `(lower, upper, at_dim)` extremes of the normalized content.
    pub content_bounds: Option<(f64, f64, f64)>,
}

impl DimensionEstimate {
    pub const CSV_HEADER: [&'static str; 8] = [
        "method",
        "value",
        "stderr",
        "r2",
        "delta_lo",
        "delta_hi",
        "content_lower",
        "content_upper",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let (lo, hi) = match self.content_bounds {
            Some((a, b, _)) => (format!("{a:.10e}"), format!("{b:.10e}")),
            None => (String::new(), String::new()),
        };
        vec![
            self.method.to_string(),
            format!("{:.10}", self.value),
            format!("{:.3e}", self.stderr),
            format!("{:.8}", self.r2),
            format!("{:.6e}", self.fit_window.0),
            format!("{:.6e}", self.fit_window.1),
            lo,
            hi,
        ]
    }

    /// Ratio upper/lower of the content bounds, if reported.
    pub fn content_spread(&self) -> Option<f64> {
        self.content_bounds.map(|(a, b, _)| b / a)
    }
}

/// Applies the scaling-window policy: drop the two coarsest scales and the
/// ones not flagged in `keep`, then fit the finer half of the survivors
/// (at least [`MIN_WINDOW`] scales). Returns the fit and its `(δ_lo, δ_hi)`.
pub fn fit_scales(
    deltas: &[f64],
    xs: &[f64],
    ys: &[f64],
    keep: &[bool],
) -> Result<(LineFit, f64, f64)> {
    let idx: Vec<usize> = (2..deltas.len())
        .filter(|&i| keep[i] && xs[i].is_finite() && ys[i].is_finite())
        .collect();
    if idx.len() < MIN_WINDOW {
        return Err(Error::InsufficientScales {
            found: idx.len(),
            needed: MIN_WINDOW,
        });
    }
    // contiguity is in the surviving index list
    let sx: Vec<f64> = idx.iter().map(|&i| xs[i]).collect();
    let sy: Vec<f64> = idx.iter().map(|&i| ys[i]).collect();
    let (a, b, fit) = fine_window(&sx, &sy, MIN_WINDOW).ok_or(Error::InsufficientScales {
        found: idx.len(),
        needed: MIN_WINDOW,
    })?;
    let d_hi = deltas[idx[a]];
    let d_lo = deltas[idx[b - 1]];
    Ok((fit, d_lo, d_hi))
}

/// Curve dimension strategy selectable by name.
pub trait CurveEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, tr: &Trajectory, grid: &ScaleGrid) -> Result<DimensionEstimate>;
}

/// Sequence dimension strategy selectable by name.
pub trait SequenceEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn estimate(&self, s: &MonotoneSequence) -> Result<DimensionEstimate>;
}

struct BoxCounter;
struct Sausage(SausageOptions);
struct GapStructure;
struct ReturnOrder;
struct SequenceBox;

impl CurveEstimator for BoxCounter {
    fn name(&self) -> &'static str {
        "box"
    }
    fn estimate(&self, tr: &Trajectory, grid: &ScaleGrid) -> Result<DimensionEstimate> {
        curve_box_dim(tr, grid)
    }
}

impl CurveEstimator for Sausage {
    fn name(&self) -> &'static str {
        "sausage"
    }
    fn estimate(&self, tr: &Trajectory, grid: &ScaleGrid) -> Result<DimensionEstimate> {
        curve::curve_sausage_dim_with(tr, grid, &self.0)
    }
}

impl SequenceEstimator for GapStructure {
    fn name(&self) -> &'static str {
        "gap"
    }
    fn estimate(&self, s: &MonotoneSequence) -> Result<DimensionEstimate> {
        seq_gap_dim(s)
    }
}

impl SequenceEstimator for ReturnOrder {
    fn name(&self) -> &'static str {
        "order"
    }
    fn estimate(&self, s: &MonotoneSequence) -> Result<DimensionEstimate> {
        seq_order_dim(s)
    }
}

impl SequenceEstimator for SequenceBox {
    fn name(&self) -> &'static str {
        "box"
    }
    fn estimate(&self, s: &MonotoneSequence) -> Result<DimensionEstimate> {
        let min_gap = s.gaps().into_iter().fold(f64::INFINITY, f64::min);
        let max_gap = s.gaps().into_iter().fold(0.0, f64::max);
        let g = ScaleGrid::spanning(max_gap, min_gap, 24)?;
        seq_box_dim(s, &g)
    }
}

/// Name → strategy tables.
pub struct Registry<T: ?Sized> {
    items: BTreeMap<&'static str, Box<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn from_entries<I: IntoIterator<Item = (&'static str, Box<T>)>>(entries: I) -> Self {
        Self {
            items: entries.into_iter().collect(),
        }
    }

    pub fn get(&self, name: &str) -> Result<&T> {
        self.items.get(name).map(|b| b.as_ref()).ok_or_else(|| {
            Error::Domain(format!(
                "unknown name `{name}` (known: {})",
                self.names().join(", ")
            ))
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.items.keys().copied().collect()
    }
}

impl Registry<dyn CurveEstimator> {
    pub fn curves(sausage: SausageOptions) -> Self {
        let list: Vec<Box<dyn CurveEstimator>> =
            vec![Box::new(BoxCounter), Box::new(Sausage(sausage))];
        Self {
            items: list.into_iter().map(|e| (e.name(), e)).collect(),
        }
    }

    pub fn register(&mut self, e: Box<dyn CurveEstimator>) {
        self.items.insert(e.name(), e);
    }
}

impl Registry<dyn SequenceEstimator> {
    pub fn sequences() -> Self {
        let list: Vec<Box<dyn SequenceEstimator>> = vec![
            Box::new(GapStructure),
            Box::new(ReturnOrder),
            Box::new(SequenceBox),
        ];
        Self {
            items: list.into_iter().map(|e| (e.name(), e)).collect(),
        }
    }

    pub fn register(&mut self, e: Box<dyn SequenceEstimator>) {
        self.items.insert(e.name(), e);
    }
}
