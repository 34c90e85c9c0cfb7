//! Box counting and δ-sausage area for planar polylines.

use rayon::prelude::*;
use std::f64::consts::TAU;

use super::{fit_scales, DimensionEstimate, Method, ScaleGrid};
use crate::error::{Error, Result};
use crate::flow::Trajectory;

fn check_resolution(tr: &Trajectory, g: &ScaleGrid) -> Result<()> {
    if tr.points.len() < 2 {
        return Err(Error::Domain("trajectory needs at least two points".into()));
    }
    if let Some(sp) = tr.resolution_limit() {
        let limit = g.delta_min() / 3.0;
        if sp > limit {
            return Err(Error::UnderResolved { spacing: sp, limit });
        }
    }
    Ok(())
}

fn cell_key(ix: i64, iy: i64) -> u64 {
    ((ix as u64 & 0xffff_ffff) << 32) | (iy as u64 & 0xffff_ffff)
}

/// Cells of side δ touched by the segment `a → b` (Amanatides–Woo walk).
fn walk_cells<F: FnMut(i64, i64)>(a: [f64; 2], b: [f64; 2], delta: f64, mut visit: F) {
    let (ax, ay) = (a[0] / delta, a[1] / delta);
    let (bx, by) = (b[0] / delta, b[1] / delta);
    let (mut ix, mut iy) = (ax.floor() as i64, ay.floor() as i64);
    let (ex, ey) = (bx.floor() as i64, by.floor() as i64);
    visit(ix, iy);
    let steps = (ex - ix).abs() + (ey - iy).abs();
    if steps == 0 {
        return;
    }
    let (dx, dy) = (bx - ax, by - ay);
    let sx = if dx > 0.0 { 1 } else { -1 };
    let sy = if dy > 0.0 { 1 } else { -1 };
    let t_dx = if dx != 0.0 {
        1.0 / dx.abs()
    } else {
        f64::INFINITY
    };
    let t_dy = if dy != 0.0 {
        1.0 / dy.abs()
    } else {
        f64::INFINITY
    };
    let mut t_mx = if dx > 0.0 {
        (ix as f64 + 1.0 - ax) * t_dx
    } else if dx < 0.0 {
        (ax - ix as f64) * t_dx
    } else {
        f64::INFINITY
    };
    let mut t_my = if dy > 0.0 {
        (iy as f64 + 1.0 - ay) * t_dy
    } else if dy < 0.0 {
        (ay - iy as f64) * t_dy
    } else {
        f64::INFINITY
    };
    for _ in 0..steps {
        if (t_mx < t_my && ix != ex) || iy == ey {
            ix += sx;
            t_mx += t_dx;
        } else {
            iy += sy;
            t_my += t_dy;
        }
        visit(ix, iy);
    }
}

/// Closed polygon through the last full turn of a trajectory that keeps
/// converging to its center; the unsampled remainder lies inside it.
fn core_loop(tr: &Trajectory) -> Option<Vec<[f64; 2]>> {
    if !tr.converges_to_center {
        return None;
    }
    let c = tr.center;
    let pts = &tr.points;
    let angle = |p: &[f64; 3]| (p[2] - c[1]).atan2(p[1] - c[0]);
    let mut acc = 0.0;
    for i in (1..pts.len()).rev() {
        acc += crate::flow::wrap_angle(angle(&pts[i]) - angle(&pts[i - 1])).abs();
        if acc >= TAU {
            return Some(pts[i - 1..].iter().map(|p| [p[1], p[2]]).collect());
        }
    }
    None
}

/// Even–odd interior of a closed polygon on the line at height `y`.
fn scanline(poly: &[[f64; 2]], y: f64, out: &mut Vec<(f64, f64)>) {
    let mut xs: Vec<f64> = Vec::new();
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        if (a[1] <= y) != (b[1] <= y) {
            xs.push(a[0] + (y - a[1]) / (b[1] - a[1]) * (b[0] - a[0]));
        }
    }
    xs.sort_unstable_by(f64::total_cmp);
    out.extend(xs.chunks_exact(2).map(|w| (w[0], w[1])));
}

fn y_range(poly: &[[f64; 2]]) -> (f64, f64) {
    poly.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p[1]), hi.max(p[1]))
        })
}

fn count_boxes(tr: &Trajectory, delta: f64) -> usize {
    let mut keys: Vec<u64> = Vec::new();
    let mut prev: Option<[f64; 2]> = None;
    tr.for_each_vertex(delta / 2.0, |p| {
        match prev {
            None => keys.push(cell_key(
                (p[0] / delta).floor() as i64,
                (p[1] / delta).floor() as i64,
            )),
            Some(q) => walk_cells(q, p, delta, |ix, iy| {
                let k = cell_key(ix, iy);
                if keys.last() != Some(&k) {
                    keys.push(k);
                }
            }),
        }
        prev = Some(p);
    });
    if let Some(poly) = core_loop(tr) {
        // cells strictly inside the loop; boundary cells come from the walk
        let (ylo, yhi) = y_range(&poly);
        let mut ivs = Vec::new();
        for j in (ylo / delta).floor() as i64..=(yhi / delta).floor() as i64 {
            ivs.clear();
            scanline(&poly, (j as f64 + 0.5) * delta, &mut ivs);
            for &(xa, xb) in &ivs {
                for i in (xa / delta - 0.5).ceil() as i64..=(xb / delta - 0.5).floor() as i64 {
                    keys.push(cell_key(i, j));
                }
            }
        }
    }
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// Grid box-counting dimension of the curve.
pub fn curve_box_dim(tr: &Trajectory, g: &ScaleGrid) -> Result<DimensionEstimate> {
    check_resolution(tr, g)?;
    let deltas = g.scales();
    let counts: Vec<usize> = deltas.par_iter().map(|&d| count_boxes(tr, d)).collect();
    let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let keep: Vec<bool> = counts.iter().map(|&c| c >= 10).collect();
    let (fit, lo, hi) = fit_scales(&deltas, &xs, &ys, &keep)?;
    let d = fit.slope.clamp(0.0, 2.0);
    let ratios: Vec<f64> = deltas
        .iter()
        .zip(&counts)
        .filter(|(dl, _)| **dl >= lo && **dl <= hi)
        .map(|(dl, &c)| c as f64 * dl.powf(d))
        .collect();
    Ok(DimensionEstimate {
        value: d,
        stderr: fit.slope_stderr,
        fit_window: (lo, hi),
        r2: fit.r2,
        method: Method::BoxCount,
        content_bounds: Some(bounds(&ratios, d)),
    })
}

fn bounds(ratios: &[f64], d: f64) -> (f64, f64, f64) {
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    (lo, hi, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SausageOptions {
    /// Raster rows per δ (≥ 8).
    pub rows_per_delta: u32,
    /// Rows per band processed at once.
    pub band_rows: i64,
    /// Cap on the number of row intervals per scale.
    pub cap: u64,
}

impl Default for SausageOptions {
    fn default() -> Self {
        Self {
            rows_per_delta: 8,
            band_rows: 2048,
            cap: 400_000_000,
        }
    }
}

/// x-interval of the capsule of radius `r` around segment `a → b`, cut by
/// the horizontal line at height `y`.
fn capsule_slice(a: [f64; 2], b: [f64; 2], r: f64, y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in [a, b] {
        let dy = y - p[1];
        if dy.abs() <= r {
            let w = (r * r - dy * dy).sqrt();
            lo = lo.min(p[0] - w);
            hi = hi.max(p[0] + w);
        }
    }
    let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
    let len = ux.hypot(uy);
    if len > 0.0 {
        let (ux, uy) = (ux / len, uy / len);
        // along: ux·(x−ax) + uy·(y−ay) ∈ [0, len]; across: −uy·(x−ax) + ux·(y−ay) ∈ [−r, r]
        let mut s_lo = f64::NEG_INFINITY;
        let mut s_hi = f64::INFINITY;
        let mut empty = false;
        let dy = y - a[1];
        for (coef, off, l, h) in [(ux, uy * dy, 0.0, len), (-uy, ux * dy, -r, r)] {
            if coef.abs() < 1e-300 {
                if off < l || off > h {
                    empty = true;
                }
                continue;
            }
            let (p, q) = ((l - off) / coef, (h - off) / coef);
            s_lo = s_lo.max(p.min(q));
            s_hi = s_hi.min(p.max(q));
        }
        if !empty && s_lo <= s_hi {
            lo = lo.min(a[0] + s_lo);
            hi = hi.max(a[0] + s_hi);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

pub(crate) fn sausage_area(tr: &Trajectory, delta: f64, opts: &SausageOptions) -> Result<f64> {
    let h = delta / opts.rows_per_delta.max(8) as f64;
    let mut segs: Vec<[f64; 4]> = Vec::new();
    let mut prev: Option<[f64; 2]> = None;
    let mut single: Option<[f64; 2]> = None;
    tr.for_each_vertex(delta, |p| {
        if let Some(q) = prev {
            segs.push([q[0], q[1], p[0], p[1]]);
        } else {
            single = Some(p);
        }
        prev = Some(p);
    });
    if segs.is_empty() {
        let p = single.expect("nonempty trajectory");
        segs.push([p[0], p[1], p[0], p[1]]);
    }
    let row_range = |s: &[f64; 4]| {
        let ylo = s[1].min(s[3]) - delta;
        let yhi = s[1].max(s[3]) + delta;
        (
            (ylo / h - 0.5).ceil() as i64,
            (yhi / h - 0.5).floor() as i64,
        )
    };
    let mut needed: u64 = 0;
    let mut band_lo = i64::MAX;
    let mut band_hi = i64::MIN;
    for s in &segs {
        let (a, b) = row_range(s);
        if b >= a {
            needed += (b - a + 1) as u64;
            band_lo = band_lo.min(a.div_euclid(opts.band_rows));
            band_hi = band_hi.max(b.div_euclid(opts.band_rows));
        }
    }
    let core = core_loop(tr);
    let core_rows = core.as_ref().map(|poly| {
        let (ylo, yhi) = y_range(poly);
        (
            (ylo / h - 0.5).ceil() as i64,
            (yhi / h - 0.5).floor() as i64,
        )
    });
    if let Some((a, b)) = core_rows {
        needed += (b - a + 1).max(0) as u64;
    }
    if needed > opts.cap {
        return Err(Error::RasterBudget {
            needed,
            cap: opts.cap,
        });
    }
    let nb = (band_hi - band_lo + 1) as usize;
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); nb];
    for (i, s) in segs.iter().enumerate() {
        let (a, b) = row_range(s);
        if b < a {
            continue;
        }
        for band in a.div_euclid(opts.band_rows)..=b.div_euclid(opts.band_rows) {
            buckets[(band - band_lo) as usize].push(i as u32);
        }
    }
    let band_areas: Vec<f64> = buckets
        .par_iter()
        .enumerate()
        .map(|(bi, idx)| {
            let base = (band_lo + bi as i64) * opts.band_rows;
            let top = base + opts.band_rows - 1;
            let mut ivs: Vec<(i64, f64, f64)> = Vec::new();
            for &i in idx {
                let s = &segs[i as usize];
                let (a, b) = row_range(s);
                for row in a.max(base)..=b.min(top) {
                    let y = (row as f64 + 0.5) * h;
                    if let Some((x1, x2)) = capsule_slice([s[0], s[1]], [s[2], s[3]], delta, y) {
                        ivs.push((row, x1, x2));
                    }
                }
            }
            if let (Some(poly), Some((a, b))) = (&core, core_rows) {
                let mut row_ivs = Vec::new();
                for row in a.max(base)..=b.min(top) {
                    row_ivs.clear();
                    scanline(poly, (row as f64 + 0.5) * h, &mut row_ivs);
                    ivs.extend(row_ivs.iter().map(|&(x1, x2)| (row, x1, x2)));
                }
            }
            ivs.sort_unstable_by(|p, q| p.0.cmp(&q.0).then(p.1.total_cmp(&q.1)));
            let mut total = 0.0;
            let mut cur: Option<(i64, f64, f64)> = None;
            for (row, x1, x2) in ivs {
                match cur {
                    Some((r, lo, hi)) if r == row && x1 <= hi => cur = Some((r, lo, hi.max(x2))),
                    Some((_, lo, hi)) => {
                        total += hi - lo;
                        cur = Some((row, x1, x2));
                    }
                    None => cur = Some((row, x1, x2)),
                }
            }
            if let Some((_, lo, hi)) = cur {
                total += hi - lo;
            }
            total * h
        })
        .collect();
    Ok(band_areas.iter().sum())
}

pub fn curve_sausage_dim(tr: &Trajectory, g: &ScaleGrid) -> Result<DimensionEstimate> {
    curve_sausage_dim_with(tr, g, &SausageOptions::default())
}

/// Dimension from the area of the δ-neighbourhood: |S_δ| ∝ δ^{2−d}.
pub fn curve_sausage_dim_with(
    tr: &Trajectory,
    g: &ScaleGrid,
    opts: &SausageOptions,
) -> Result<DimensionEstimate> {
    check_resolution(tr, g)?;
    let deltas = g.scales();
    let mut areas = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        areas.push(sausage_area(tr, d, opts)?);
    }
    let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
    // log of the Minkowski-box count surrogate |S_δ|/δ²
    let ys: Vec<f64> = areas
        .iter()
        .zip(&deltas)
        .map(|(a, d)| (a / (d * d)).ln())
        .collect();
    let keep: Vec<bool> = areas
        .iter()
        .zip(&deltas)
        .map(|(a, d)| a / (d * d) >= 10.0)
        .collect();
    let (fit, lo, hi) = fit_scales(&deltas, &xs, &ys, &keep)?;
    let d = fit.slope.clamp(0.0, 2.0);
    let ratios: Vec<f64> = deltas
        .iter()
        .zip(&areas)
        .filter(|(dl, _)| **dl >= lo && **dl <= hi)
        .map(|(dl, a)| a / dl.powf(2.0 - d))
        .collect();
    Ok(DimensionEstimate {
        value: d,
        stderr: fit.slope_stderr,
        fit_window: (lo, hi),
        r2: fit.r2,
        method: Method::Sausage,
        content_bounds: Some(bounds(&ratios, d)),
    })
}

/// Radial distance between the last point and the point one full turn
/// earlier around the trajectory's center.
pub fn innermost_turn_gap(tr: &Trajectory) -> Option<f64> {
    let c = tr.center;
    let pts = &tr.points;
    let n = pts.len();
    if n < 2 {
        return None;
    }
    let radius = |p: &[f64; 3]| (p[1] - c[0]).hypot(p[2] - c[1]);
    let angle = |p: &[f64; 3]| (p[2] - c[1]).atan2(p[1] - c[0]);
    let mut acc = 0.0;
    for i in (1..n).rev() {
        acc += crate::flow::wrap_angle(angle(&pts[i]) - angle(&pts[i - 1])).abs();
        if acc >= TAU {
            // interpolate to exactly one turn
            let over = acc - TAU;
            let step = crate::flow::wrap_angle(angle(&pts[i]) - angle(&pts[i - 1])).abs();
            let w = if step > 0.0 { over / step } else { 0.0 };
            let r_prev = radius(&pts[i - 1]) * (1.0 - w) + radius(&pts[i]) * w;
            return Some((r_prev - radius(&pts[n - 1])).abs());
        }
    }
    None
}

/// Boxes a curve of this many finest-scale lengths would touch.
const MAX_GRID_CELLS: f64 = 4e6;

/// Scale grid for a spiral toward its center: from an eighth of the outer
/// radius down to the innermost turn gap (and ≥ 3× sample spacing when
/// the trajectory cannot be refined, and ≥ length / 4e6).
pub fn spiral_grid(tr: &Trajectory, count: usize) -> Result<ScaleGrid> {
    let c = tr.center;
    let r_max = tr
        .points
        .iter()
        .map(|p| (p[1] - c[0]).hypot(p[2] - c[1]))
        .fold(0.0, f64::max);
    let mut lo = innermost_turn_gap(tr).ok_or(Error::NotSpiraling)?;
    if let Some(sp) = tr.resolution_limit() {
        lo = lo.max(3.0 * sp);
    }
    let length: f64 = tr
        .points
        .windows(2)
        .map(|w| (w[1][1] - w[0][1]).hypot(w[1][2] - w[0][2]))
        .sum();
    lo = lo.max(length / MAX_GRID_CELLS);
    ScaleGrid::spanning(r_max / 8.0, lo, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{closed_spiral, ClosedSpiralKind};

    fn segment(len: f64) -> Trajectory {
        let pts = (0..=4000).map(|i| {
            let s = i as f64 / 4000.0;
            [s, 0.1 + s * len * 0.6, 0.2 + s * len * 0.8]
        });
        Trajectory::from_points(pts.collect(), [0.0, 0.0])
    }

    #[test]
    fn walk_covers_brute_force_cells() {
        let (a, b, d) = ([0.13, 0.71], [2.9, -1.37], 0.25);
        let mut got = Vec::new();
        walk_cells(a, b, d, |i, j| got.push((i, j)));
        let mut want = Vec::new();
        for k in 0..=200_000 {
            let t = k as f64 / 200_000.0;
            let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
            let c = ((p[0] / d).floor() as i64, (p[1] / d).floor() as i64);
            if want.last() != Some(&c) {
                want.push(c);
            }
        }
        assert_eq!(got, want);
    }

    #[test]
    fn capsule_slice_matches_distance_test() {
        let (a, b, r) = ([0.2, 0.1], [1.0, 0.7], 0.15);
        let dist = |p: [f64; 2]| {
            let (ux, uy) = (b[0] - a[0], b[1] - a[1]);
            let t =
                (((p[0] - a[0]) * ux + (p[1] - a[1]) * uy) / (ux * ux + uy * uy)).clamp(0.0, 1.0);
            (p[0] - a[0] - t * ux).hypot(p[1] - a[1] - t * uy)
        };
        for k in 0..50 {
            let y = -0.1 + k as f64 * 0.02;
            let (lo, hi) = match capsule_slice(a, b, r, y) {
                Some(v) => v,
                None => {
                    assert!((0..1000).all(|i| dist([-0.5 + i as f64 * 0.002, y]) > r));
                    continue;
                }
            };
            assert!((dist([lo, y]) - r).abs() < 1e-12 && (dist([hi, y]) - r).abs() < 1e-12);
            assert!(dist([(lo + hi) / 2.0, y]) <= r);
        }
    }

    #[test]
    fn unit_segment_box_dimension() {
        let tr = segment(1.0);
        let g = ScaleGrid::spanning(0.1, 1e-3, 14).unwrap();
        let d = curve_box_dim(&tr, &g).unwrap();
        assert!((d.value - 1.0).abs() < 0.02, "{d:?}");
    }

    #[test]
    fn unit_segment_tube_area() {
        let tr = segment(1.0);
        for delta in [0.05, 0.01, 0.003] {
            let a = sausage_area(&tr, delta, &SausageOptions::default()).unwrap();
            let want = 2.0 * delta + std::f64::consts::PI * delta * delta;
            assert!(
                (a / want - 1.0).abs() < 2e-3,
                "delta={delta}: {a} vs {want}"
            );
        }
        let g = ScaleGrid::spanning(0.1, 1e-3, 14).unwrap();
        let d = curve_sausage_dim(&tr, &g).unwrap();
        assert!((d.value - 1.0).abs() < 0.02, "{d:?}");
    }

    #[test]
    fn under_resolved_samples_rejected() {
        let pts: Vec<[f64; 3]> = (0..=10).map(|i| [i as f64, i as f64 * 0.1, 0.0]).collect();
        let tr = Trajectory::from_points(pts, [0.0, 0.0]);
        let g = ScaleGrid::spanning(0.5, 0.01, 14).unwrap();
        assert!(matches!(
            curve_box_dim(&tr, &g),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn raster_budget_enforced() {
        let tr = segment(1.0);
        let opts = SausageOptions {
            cap: 1000,
            ..Default::default()
        };
        assert!(matches!(
            sausage_area(&tr, 1e-4, &opts),
            Err(Error::RasterBudget { .. })
        ));
    }

    #[test]
    fn band_split_does_not_change_area() {
        let tr = closed_spiral(
            ClosedSpiralKind::PowerSpiral { alpha: 0.5 },
            (1.0, 60.0),
            64,
        )
        .unwrap();
        let a = sausage_area(&tr, 0.004, &SausageOptions::default()).unwrap();
        let b = sausage_area(
            &tr,
            0.004,
            &SausageOptions {
                band_rows: 37,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn turn_gap_of_power_spiral() {
        let hi = 1.0 + 50.0 * TAU;
        let tr =
            closed_spiral(ClosedSpiralKind::PowerSpiral { alpha: 0.5 }, (1.0, hi), 256).unwrap();
        let want = (hi - TAU).powf(-0.5) - hi.powf(-0.5);
        let got = innermost_turn_gap(&tr).unwrap();
        assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
    }
}
