//! Slow divergence integral, Ĩ sign checks and balanced canard levels.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::branch::{fiber_with, HopfPoint, Jets};
use crate::error::{Error, Result};
use crate::models::PlanarSystem;
use crate::numerics::quad::integrate;
use crate::numerics::root::brent;

/// Half-width of the patch around x_c where the integrand is replaced by
/// its linearization.
pub const PATCH: f64 = 1e-6;
const QUAD_TARGET: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdiValue {
    pub value: f64,
    pub y_tilde: f64,
    pub y_bar: f64,
    pub quadrature_error: f64,
}

/// Slow-fast system with its Hopf point and cached derivatives.
#[derive(Debug, Clone)]
pub struct SdiContext {
    jets: Jets,
    hopf: HopfPoint,
}

impl SdiContext {
    pub fn new(sys: &PlanarSystem, hopf: &HopfPoint) -> Result<Self> {
        Ok(Self {
            jets: Jets::new(sys)?,
            hopf: *hopf,
        })
    }

    pub fn hopf(&self) -> &HopfPoint {
        &self.hopf
    }

    pub fn fiber(&self, y: f64) -> Result<(f64, f64)> {
        fiber_with(&self.jets, y, &self.hopf)
    }

    /// ∫_lo^hi (f_x)²/(g·f_y) along the critical curve through the Hopf point.
    fn integral(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let (xc, yc) = self.hopf.location;
        let c = &self.hopf.certs;
        let j = &self.jets;
        let slope = c.f_xx * c.f_xx / (c.g_x * c.f_y);
        let bad = Cell::new(None::<f64>);
        let curv = -c.f_xx / (2.0 * c.f_y);
        let integrand = |x: f64| -> f64 {
            let dx = x - xc;
            let Some(y) = j.graph_y(x, yc + curv * dx * dx) else {
                bad.set(Some(x));
                return 0.0;
            };
            let fx = j.fx.eval(x, y);
            let den = j.g.eval(x, y) * j.fy.eval(x, y);
            let v = fx * fx / den;
            if !v.is_finite() {
                bad.set(Some(x));
                return 0.0;
            }
            v
        };
        let mut value = 0.0;
        let mut err = 0.0;
        let mut piece = |a: f64, b: f64| {
            if b > a {
                let r = integrate(&integrand, a, b, 1e-14, 1e-13, 4000);
                value += r.value;
                err += r.abs_err;
            }
        };
        piece(lo, hi.min(xc - PATCH));
        piece(lo.max(xc + PATCH), hi);
        let (pa, pb) = (lo.max(xc - PATCH), hi.min(xc + PATCH));
        if pb > pa {
            value += 0.5 * slope * ((pb - xc).powi(2) - (pa - xc).powi(2));
        }
        if let Some(x) = bad.get() {
            return Err(Error::SlowSingularity { x });
        }
        Ok((value, err))
    }

    /// I(ỹ, ȳ) = −∫ from ω(ỹ)_x to α(ȳ)_x of (f_x)²/(g·f_y) dx.
    pub fn sdi(&self, y_tilde: f64, y_bar: f64) -> Result<SdiValue> {
        let (_, omega) = self.fiber(y_tilde)?;
        let (alpha, _) = self.fiber(y_bar)?;
        let (lo, hi, sign) = if alpha < omega {
            (alpha, omega, 1.0)
        } else {
            (omega, alpha, -1.0)
        };
        let (v, err) = self.integral(lo, hi)?;
        let value = sign * v;
        let target = QUAD_TARGET * value.abs().max(1.0);
        if err > target {
            return Err(Error::QuadratureFailure { err, target });
        }
        Ok(SdiValue {
            value,
            y_tilde,
            y_bar,
            quadrature_error: err,
        })
    }

    pub fn tilde_i(&self, y: f64) -> Result<f64> {
        Ok(self.sdi(y, y)?.value)
    }

    /// Sampled sign of Ĩ on the interval strictly between `limit` and `far`.
    pub fn check_assumption2(&self, limit: f64, far: f64, samples: usize) -> Result<Assumption2> {
        let span = far - limit;
        if span == 0.0 || samples < 2 {
            return Err(Error::Domain("empty interval for the sign check".into()));
        }
        let (dlo, dhi) = (span.abs() * 1e-6, span.abs());
        let mut first: Option<f64> = None;
        for i in 0..samples {
            let t = i as f64 / (samples - 1) as f64;
            let d = dhi * (dlo / dhi).powf(1.0 - t);
            let y = limit + span.signum() * d;
            let v = self.tilde_i(y)?;
            if v.abs() <= NULL_TOL * d {
                return Ok(Assumption2::Violated(y));
            }
            match first {
                None => first = Some(v.signum()),
                Some(s) if s != v.signum() => return Ok(Assumption2::Violated(y)),
                _ => {}
            }
        }
        Ok(if first == Some(-1.0) {
            Assumption2::ConstantNeg
        } else {
            Assumption2::ConstantPos
        })
    }

    /// Level y* in `window` where Ĩ changes sign exactly once.
    pub fn balanced_canard_level(&self, window: (f64, f64), samples: usize) -> Result<f64> {
        let (a, b) = window;
        let yc = self.hopf.location.1;
        let ys: Vec<f64> = (0..samples)
            .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
            .collect();
        let vals = ys
            .iter()
            .map(|&y| self.tilde_i(y))
            .collect::<Result<Vec<_>>>()?;
        if ys
            .iter()
            .zip(&vals)
            .all(|(y, v)| v.abs() <= NULL_TOL * (y - yc).abs())
        {
            return Err(Error::MultipleRoots { count: samples });
        }
        let changes: Vec<usize> = (1..samples)
            .filter(|&i| vals[i - 1] * vals[i] < 0.0)
            .collect();
        match changes.len() {
            0 => Err(Error::NoBalancedLevel),
            1 => {
                let i = changes[0];
                let f = |y: f64| self.tilde_i(y).unwrap_or(f64::NAN);
                Ok(brent(f, ys[i - 1], ys[i], 1e-14, 200)?)
            }
            n => Err(Error::MultipleRoots { count: n }),
        }
    }
}

/// |Ĩ(y)| at most this times |y − limit| counts as zero.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Assumption2 {
    ConstantNeg,
    ConstantPos,
    Violated(f64),
}

pub fn sdi(sys: &PlanarSystem, y_tilde: f64, y_bar: f64, hopf: &HopfPoint) -> Result<SdiValue> {
    SdiContext::new(sys, hopf)?.sdi(y_tilde, y_bar)
}

pub fn tilde_i(sys: &PlanarSystem, y: f64, hopf: &HopfPoint) -> Result<f64> {
    SdiContext::new(sys, hopf)?.tilde_i(y)
}

pub fn check_assumption2(
    sys: &PlanarSystem,
    hopf: &HopfPoint,
    limit: f64,
    far: f64,
    samples: usize,
) -> Result<Assumption2> {
    SdiContext::new(sys, hopf)?.check_assumption2(limit, far, samples)
}

pub fn balanced_canard_level(
    sys: &PlanarSystem,
    hopf: &HopfPoint,
    window: (f64, f64),
) -> Result<f64> {
    SdiContext::new(sys, hopf)?.balanced_canard_level(window, 64)
}
