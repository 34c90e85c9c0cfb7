//! Monotone sequences and their box dimension.

use super::{fit_scales, DimensionEstimate, Method, ScaleGrid};
use crate::error::{Error, Result};
use crate::numerics::fit::linear_fit;

pub const MIN_ESTIMATION_LEN: usize = 16;

/// Strictly monotone finite sequence converging toward `limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSequence {
    values: Vec<f64>,
    limit: f64,
}

impl MonotoneSequence {
    pub fn new(values: Vec<f64>, limit: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DegenerateSequence("empty sequence".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || !limit.is_finite() {
            return Err(Error::DegenerateSequence("non-finite value".into()));
        }
        if values.len() >= 2 {
            let up = values[1] > values[0];
            for (i, w) in values.windows(2).enumerate() {
                if (w[1] > w[0]) != up || w[1] == w[0] {
                    return Err(Error::DegenerateSequence(format!(
                        "not strictly monotone at index {}",
                        i + 1
                    )));
                }
            }
            let first = (values[0] - limit).abs();
            let last = (values[values.len() - 1] - limit).abs();
            if !(last < first) {
                return Err(Error::DegenerateSequence(
                    "values do not approach the limit".into(),
                ));
            }
            if (values[values.len() - 1] - limit).signum() != (values[0] - limit).signum() {
                return Err(Error::DegenerateSequence(
                    "sequence jumps over its limit".into(),
                ));
            }
        }
        Ok(Self { values, limit })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Distances |y_k − limit|.
    pub fn distances(&self) -> Vec<f64> {
        self.values.iter().map(|v| (v - self.limit).abs()).collect()
    }

    /// Gaps |y_k − y_{k+1}|.
    pub fn gaps(&self) -> Vec<f64> {
        self.values
            .windows(2)
            .map(|w| (w[0] - w[1]).abs())
            .collect()
    }

    /// Image under an increasing map of the distance to the limit; the new
    /// sequence accumulates at 0.
    pub fn map_distances<F: Fn(f64) -> f64>(&self, f: F) -> Result<Self> {
        Self::new(self.distances().into_iter().map(f).collect(), 0.0)
    }

    fn require_estimable(&self) -> Result<()> {
        if self.values.len() < MIN_ESTIMATION_LEN {
            return Err(Error::DegenerateSequence(format!(
                "{} terms, need at least {MIN_ESTIMATION_LEN}",
                self.values.len()
            )));
        }
        Ok(())
    }

    /// Scales from the smallest to the largest gap.
    pub fn natural_grid(&self, count: usize) -> Result<ScaleGrid> {
        let gaps = self.gaps();
        let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = gaps.iter().copied().fold(0.0, f64::max);
        if !(lo > 0.0) || !(hi > lo) {
            return Err(Error::DegenerateSequence(
                "gaps do not span a scale range".into(),
            ));
        }
        ScaleGrid::spanning(hi / 2.0, lo / 2.0, count)
    }
}

/// Number of δ-intervals (grid-aligned) needed to cover the sequence and
/// its limit.
fn box_count(points: &[f64], delta: f64) -> usize {
    let mut cells: Vec<i64> = points.iter().map(|v| (v / delta).floor() as i64).collect();
    cells.sort_unstable();
    cells.dedup();
    cells.len()
}

pub fn seq_box_dim(s: &MonotoneSequence, g: &ScaleGrid) -> Result<DimensionEstimate> {
    s.require_estimable()?;
    let min_gap = s.gaps().into_iter().fold(f64::INFINITY, f64::min);
    if g.delta_min() < min_gap * (1.0 - 1e-12) {
        return Err(Error::DegenerateSequence(format!(
            "delta_min {:e} below the smallest gap {:e}",
            g.delta_min(),
            min_gap
        )));
    }
    let mut pts: Vec<f64> = s.values().iter().map(|v| v - s.limit()).collect();
    pts.push(0.0);
    let deltas = g.scales();
    let counts: Vec<f64> = deltas.iter().map(|&d| box_count(&pts, d) as f64).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
    let keep: Vec<bool> = counts.iter().map(|&c| c >= 10.0).collect();
    let (fit, lo, hi) = fit_scales(&deltas, &xs, &ys, &keep)?;
    Ok(DimensionEstimate {
        value: fit.slope.clamp(0.0, 1.0),
        stderr: fit.slope_stderr,
        fit_window: (lo, hi),
        r2: fit.r2,
        method: Method::BoxCount,
        content_bounds: None,
    })
}

/// Exact length of the δ-neighbourhood of the sequence (plus its limit)
/// inside the interval it spans, i.e. without the two outer caps.
pub fn neighbourhood_length(gaps: &[f64], tail: f64, delta: f64) -> f64 {
    let mut total = tail + 2.0 * delta;
    for &g in gaps {
        total += g.min(2.0 * delta);
    }
    total
}

/// Gap-structure estimate: |U_δ| computed exactly from the gaps and fitted
/// to δ^{1−d}.
pub fn seq_gap_dim(s: &MonotoneSequence) -> Result<DimensionEstimate> {
    s.require_estimable()?;
    let g = s.natural_grid(24)?;
    seq_gap_dim_on(s, &g)
}

pub fn seq_gap_dim_on(s: &MonotoneSequence, g: &ScaleGrid) -> Result<DimensionEstimate> {
    s.require_estimable()?;
    let gaps = s.gaps();
    let tail = (s.values()[s.len() - 1] - s.limit()).abs();
    let deltas = g.scales();
    let areas: Vec<f64> = deltas
        .iter()
        .map(|&d| neighbourhood_length(&gaps, tail, d))
        .collect();
    // |U_δ| ∝ δ^{1−d}: fit log|U_δ| against log(1/δ), slope = d − 1
    let xs: Vec<f64> = deltas.iter().map(|d| (1.0 / d).ln()).collect();
    let ys: Vec<f64> = areas.iter().map(|a| a.ln()).collect();
    let keep = vec![true; deltas.len()];
    let (fit, lo, hi) = fit_scales(&deltas, &xs, &ys, &keep)?;
    let d = (1.0 + fit.slope).clamp(0.0, 1.0);
    let ratios: Vec<f64> = deltas
        .iter()
        .zip(&areas)
        .filter(|(dl, _)| **dl >= lo && **dl <= hi)
        .map(|(dl, a)| a / dl.powf(1.0 - d))
        .collect();
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(0.0, f64::max);
    Ok(DimensionEstimate {
        value: d,
        stderr: fit.slope_stderr,
        fit_window: (lo, hi),
        r2: fit.r2,
        method: Method::GapStructure,
        content_bounds: Some((lower, upper, d)),
    })
}

/// Return-map order estimate. For an orbit of y ↦ y − c·y^μ(1 + o(1))
/// the gaps satisfy g_k ≈ c·e_k^μ, and the box dimension is 1 − 1/μ.
/// μ is the slope of log g_k against log e_k over the second half of the
/// sequence.
pub fn seq_order_dim(s: &MonotoneSequence) -> Result<DimensionEstimate> {
    s.require_estimable()?;
    let e = s.distances();
    let g = s.gaps();
    let start = g.len() / 2;
    let xs: Vec<f64> = e[start..g.len()].iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = g[start..].iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::DegenerateSequence("distances do not vary".into()))?;
    if !(fit.slope >= 1.0 - 1e-9) {
        return Err(Error::DegenerateSequence(format!(
            "return-map order {} below 1",
            fit.slope
        )));
    }
    let mu = fit.slope.max(1.0);
    let d = 1.0 - 1.0 / mu;
    Ok(DimensionEstimate {
        value: d,
        stderr: fit.slope_stderr / (mu * mu),
        fit_window: (g[g.len() - 1], g[start]),
        r2: fit.r2,
        method: Method::ReturnOrder,
        content_bounds: None,
    })
}
