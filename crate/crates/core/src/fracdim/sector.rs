//! Nucleus–tail estimator for power-law spirals in generalized polar
//! coordinates `(x, y) = (r^n Cs φ, r^m Sn φ)`.
//!
//! Along a ray φ = const the spiral crosses at radii `r_j` with
//! `r_j^{−p} = u₀ + κ(H(φ) + j·c_T)`. Each crossing contributes a radial
//! interval of half-width `w = δ|γ'|/J`; once consecutive intervals overlap
//! everything inside is covered (the nucleus). The area is integrated over
//! one period of φ entirely in log space, so scales far below the floating
//! point range are reachable.

use std::f64::consts::TAU;
use std::sync::Arc;

use super::{fit_scales, DimensionEstimate, Method};
use crate::error::{Error, Result};
use crate::models::{DegFocusParams, GenTrigTable};
use crate::numerics::quad::integrate;
use crate::numerics::root::brent;

#[derive(Debug, Clone)]
pub enum TrigShape {
    /// cos, sin; H(φ) = φ.
    Classical,
    Table(Arc<GenTrigTable>),
}

#[derive(Debug, Clone)]
pub struct PowerLawSpiral {
    pub m: u32,
    pub n: u32,
    pub p: f64,
    pub kappa: f64,
    pub ln_u0: f64,
    pub shape: TrigShape,
}

impl PowerLawSpiral {
    /// r = (1 + φ)^{−α}, φ ≥ 0.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::Domain(format!("alpha {alpha} outside (0, 1]")));
        }
        Ok(Self {
            m: 1,
            n: 1,
            p: 1.0 / alpha,
            kappa: 1.0,
            ln_u0: 0.0,
            shape: TrigShape::Classical,
        })
    }

    /// Spiral of dr/dψ = −r^{2l+1} started at `r0` (weak focus of order l).
    pub fn weak_focus(l: u32, r0: f64) -> Result<Self> {
        if l == 0 || !(r0 > 0.0) {
            return Err(Error::Domain("weak focus needs l ≥ 1 and r0 > 0".into()));
        }
        let p = 2.0 * l as f64;
        Ok(Self {
            m: 1,
            n: 1,
            p,
            kappa: p,
            ln_u0: -p * r0.ln(),
            shape: TrigShape::Classical,
        })
    }

    /// Stable degenerate focus with k ≥ 1 started at generalized radius `r0`.
    pub fn degenerate_focus(p: &DegFocusParams, table: Arc<GenTrigTable>, r0: f64) -> Result<Self> {
        if p.k == 0 {
            return Err(Error::Domain("k = 0 gives an exponential spiral".into()));
        }
        if table.m != p.m || table.n != p.n {
            return Err(Error::Domain(
                "trigonometric table does not match (m, n)".into(),
            ));
        }
        if !(r0 > 0.0) {
            return Err(Error::Domain("r0 must be positive".into()));
        }
        let pe = p.p() as f64;
        Ok(Self {
            m: p.m,
            n: p.n,
            p: pe,
            kappa: pe,
            ln_u0: -pe * r0.ln(),
            shape: TrigShape::Table(table),
        })
    }

    fn period(&self) -> f64 {
        match &self.shape {
            TrigShape::Classical => TAU,
            TrigShape::Table(t) => t.period,
        }
    }

    fn c_t(&self) -> f64 {
        match &self.shape {
            TrigShape::Classical => TAU,
            TrigShape::Table(t) => t.h_period_exact(),
        }
    }

    /// (Cs, Sn, H, H') at φ.
    fn ray(&self, phi: f64) -> [f64; 4] {
        match &self.shape {
            TrigShape::Classical => {
                let (s, c) = phi.sin_cos();
                [c, s, phi, 1.0]
            }
            TrigShape::Table(t) => {
                let (c, s) = t.cs_sn(phi);
                let hp = s.powi(self.n as i32 - 1) * c.powi(self.m as i32 - 1);
                [c, s, t.h(phi), hp]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorOptions {
    pub scales: usize,
    /// Nucleus radius at the coarsest scale, relative to the start radius.
    pub outer_frac: f64,
    /// Nucleus radius at the finest scale, relative to the start radius.
    pub inner_frac: f64,
    pub slices: usize,
    /// Crossings summed exactly before switching to the continuum sum.
    pub direct_terms: usize,
}

impl Default for SectorOptions {
    fn default() -> Self {
        Self {
            scales: 24,
            outer_frac: 0.25,
            inner_frac: 1e-3,
            slices: 256,
            direct_terms: 64,
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn ln_abs(v: f64) -> f64 {
    if v == 0.0 {
        f64::NEG_INFINITY
    } else {
        v.abs().ln()
    }
}

struct Ray<'a> {
    sp: &'a PowerLawSpiral,
    cs: f64,
    sn: f64,
    h: f64,
    hp: f64,
    ln_kc: f64,
}

impl Ray<'_> {
    /// ln |γ'(φ)| on this ray at ln r = s.
    fn ln_speed(&self, s: f64) -> f64 {
        let (m, n) = (self.sp.m as f64, self.sp.n as f64);
        let drift = self.sp.kappa / self.sp.p * self.hp * (self.sp.p * s).exp();
        let a = -n * self.sn.powi(2 * self.sp.n as i32 - 1) - n * self.cs * drift;
        let b = m * self.cs.powi(2 * self.sp.m as i32 - 1) - m * self.sn * drift;
        0.5 * log_add(2.0 * (n * s + ln_abs(a)), 2.0 * (m * s + ln_abs(b)))
    }

    /// ln of the radial half-width of the δ-neighbourhood.
    fn ln_width(&self, s: f64, ln_delta: f64) -> f64 {
        let (m, n) = (self.sp.m as f64, self.sp.n as f64);
        ln_delta + self.ln_speed(s) - (m * n).ln() - (n + m - 1.0) * s
    }

    /// ln of the radial distance to the next crossing inward.
    fn ln_gap(&self, s: f64) -> f64 {
        let p = self.sp.p;
        let ln_eps = self.ln_kc + p * s;
        let ln_x = if ln_eps < -700.0 {
            ln_eps - p.ln()
        } else {
            let x = ln_eps.exp().ln_1p() / p;
            return s + (-(-x).exp_m1()).ln();
        };
        s + ln_x
    }

    /// ln r of crossing j.
    fn crossing(&self, j: f64) -> f64 {
        let add = self.sp.kappa * (self.h + j * self.sp.c_t());
        let ln_u = if add > 0.0 {
            log_add(self.sp.ln_u0, add.ln())
        } else {
            self.sp.ln_u0
        };
        -ln_u / self.sp.p
    }
}

fn slice_ln_area(
    sp: &PowerLawSpiral,
    phi: f64,
    ln_delta: f64,
    opts: &SectorOptions,
) -> Result<f64> {
    let [cs, sn, h, hp] = sp.ray(phi);
    let ray = Ray {
        sp,
        cs,
        sn,
        h,
        hp,
        ln_kc: (sp.kappa * sp.c_t()).ln(),
    };
    let (m, n) = (sp.m as f64, sp.n as f64);
    let merge = |s: f64| ray.ln_gap(s) - (2f64.ln() + ray.ln_width(s, ln_delta));
    let s0 = ray.crossing(0.0);
    let s_star = if merge(s0) <= 0.0 {
        s0
    } else {
        let mut step = 1.0;
        let mut lo = s0 - step;
        while merge(lo) > 0.0 {
            step *= 2.0;
            lo = s0 - step;
            if step > 1e6 {
                return Err(Error::Domain("nucleus radius not bracketed".into()));
            }
        }
        brent(merge, lo, s0, 1e-12, 300)?
    };

    // first crossing whose gap to the next is covered; beyond ~2^52 the
    // index is not representable and the continuous root is used instead
    let ln_kc = ray.ln_kc;
    let ln_j = -sp.p * s_star - ln_kc;
    let first = if ln_j < 36.0 {
        let mut jj = (((-sp.p * s_star).exp() - sp.ln_u0.exp()) / sp.kappa - h) / sp.c_t();
        jj = jj.ceil().max(0.0);
        while merge(ray.crossing(jj)) > 0.0 {
            jj += 1.0;
        }
        while jj > 0.0 && merge(ray.crossing(jj - 1.0)) <= 0.0 {
            jj -= 1.0;
        }
        Some(jj as usize)
    } else {
        None
    };
    let s_edge = first.map_or(s_star, |jj| ray.crossing(jj as f64));

    // nucleus: ∫_0^{r+w} J dr at the edge crossing
    let ln_edge = log_add(s_edge, ray.ln_width(s_edge, ln_delta));
    let mut total = (m * n / (m + n)).ln() + (m + n) * ln_edge;

    // tail: Σ 2δ|γ'| over separated crossings
    let ln_term = |s: f64| 2f64.ln() + ln_delta + ray.ln_speed(s);
    let n_sep = first.unwrap_or(usize::MAX);
    let mut j = 0usize;
    while j < opts.direct_terms.min(n_sep) {
        total = log_add(total, ln_term(ray.crossing(j as f64)));
        j += 1;
    }
    if j < n_sep {
        // Σ_{j=D}^{J−1} f ≈ ∫ f dj + (f(D) + f(J−1))/2, |dj/ds| = p e^{−ps}/(κ c_T)
        let s_hi = ray.crossing(j as f64);
        let s_lo = first.map_or(s_star, |jj| ray.crossing((jj - 1) as f64));
        if first == Some(j + 1) {
            return Ok(log_add(total, ln_term(s_hi)));
        }
        total = log_add(total, ln_term(s_hi) - 2f64.ln());
        if first.is_some() {
            total = log_add(total, ln_term(s_lo) - 2f64.ln());
        }
        let p = sp.p;
        let ln_dens = |s: f64| ln_term(s) + p.ln() - p * s - ln_kc;
        let peak = ln_dens(s_lo)
            .max(ln_dens(s_hi))
            .max(ln_dens(0.5 * (s_lo + s_hi)));
        let q = integrate(|s| (ln_dens(s) - peak).exp(), s_lo, s_hi, 0.0, 1e-10, 2000);
        if !(q.value > 0.0) {
            return Err(Error::QuadratureFailure {
                err: q.abs_err,
                target: 1e-10,
            });
        }
        total = log_add(total, peak + q.value.ln());
    }
    Ok(total)
}

/// ln of the area of the δ-neighbourhood of the full spiral.
pub fn sector_ln_area(sp: &PowerLawSpiral, ln_delta: f64, opts: &SectorOptions) -> Result<f64> {
    let t = sp.period();
    let k = opts.slices.max(16);
    let dphi = t / k as f64;
    let vals = (0..k)
        .map(|i| slice_ln_area(sp, (i as f64 + 0.5) * dphi, ln_delta, opts))
        .collect::<Result<Vec<f64>>>()?;
    let peak = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = vals.iter().map(|v| (v - peak).exp()).sum();
    Ok(peak + (sum * dphi).ln())
}

/// ln δ at which the nucleus on the ray φ = 0 has radius `r0·frac`.
fn ln_delta_for(sp: &PowerLawSpiral, frac: f64) -> f64 {
    let [cs, sn, h, hp] = sp.ray(0.0);
    let ray = Ray {
        sp,
        cs,
        sn,
        h,
        hp,
        ln_kc: (sp.kappa * sp.c_t()).ln(),
    };
    let s = ray.crossing(0.0) + frac.ln();
    let (m, n) = (sp.m as f64, sp.n as f64);
    // gap = 2w  ⇔  ln δ = ln gap − ln 2 − ln|γ'| + ln(mn) + (n+m−1)s
    ray.ln_gap(s) - 2f64.ln() - ray.ln_speed(s) + (m * n).ln() + (n + m - 1.0) * s
}

/// Dimension from |S_δ| ∝ δ^{2−d} over a log-spaced δ range chosen so the
/// nucleus shrinks from `outer_frac` to `inner_frac` of the start radius.
/// The reported fit window is in ln δ.
pub fn sector_dim(sp: &PowerLawSpiral, opts: &SectorOptions) -> Result<DimensionEstimate> {
    let hi = ln_delta_for(sp, opts.outer_frac);
    let lo = ln_delta_for(sp, opts.inner_frac);
    if !(lo < hi) || !lo.is_finite() {
        return Err(Error::Domain("degenerate sector scale range".into()));
    }
    let k = opts.scales.max(12);
    let ln_deltas: Vec<f64> = (0..k)
        .map(|i| hi + (lo - hi) * i as f64 / (k - 1) as f64)
        .collect();
    let ln_areas = ln_deltas
        .iter()
        .map(|&ld| sector_ln_area(sp, ld, opts))
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = ln_deltas.iter().map(|v| -v).collect();
    let ys: Vec<f64> = ln_areas
        .iter()
        .zip(&ln_deltas)
        .map(|(a, d)| a - 2.0 * d)
        .collect();
    let (fit, w_lo, w_hi) = fit_scales(&ln_deltas, &xs, &ys, &vec![true; k])?;
    let d = fit.slope.clamp(0.0, 2.0);
    let ratios: Vec<f64> = ln_deltas
        .iter()
        .zip(&ln_areas)
        .filter(|(ld, _)| **ld >= w_lo && **ld <= w_hi)
        .map(|(ld, la)| (la - (2.0 - d) * ld).exp())
        .collect();
    let lower = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = ratios.iter().copied().fold(0.0, f64::max);
    Ok(DimensionEstimate {
        value: d,
        stderr: fit.slope_stderr,
        fit_window: (w_lo, w_hi),
        r2: fit.r2,
        method: Method::Sector,
        content_bounds: Some((lower, upper, d)),
    })
}
