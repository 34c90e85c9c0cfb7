#![allow(dead_code)]

use fracdyn::flow::Trajectory;
use fracdyn::fracdim::{spiral_grid, CurveEstimator, Registry, SausageOptions};
use fracdyn::models::{PlanarSystem, SystemKind};
use fracdyn::slowfast::{find_slow_fast_hopf, SdiContext};
use fracdyn::zoo::{zoo, ModelParams, SpiralSettings};

pub fn zoo_curve(model: &str, p: &ModelParams) -> Trajectory {
    zoo()
        .get(model)
        .unwrap()
        .trajectory(p, &SpiralSettings::default())
        .unwrap()
}

/// `(box, sausage)` on the default 24-scale spiral grid.
pub fn curve_dims(tr: &Trajectory) -> (f64, f64) {
    let reg = Registry::<dyn CurveEstimator>::curves(SausageOptions::default());
    let grid = spiral_grid(tr, 24).unwrap();
    let b = reg.get("box").unwrap().estimate(tr, &grid).unwrap().value;
    let s = reg
        .get("sausage")
        .unwrap()
        .estimate(tr, &grid)
        .unwrap()
        .value;
    (b, s)
}

pub fn power(alpha: f64) -> ModelParams {
    ModelParams {
        alpha: Some(alpha),
        ..Default::default()
    }
}

pub fn slow_fast(f: &str, g: &str) -> SdiContext {
    let sys = PlanarSystem::from_strings(f, g, SystemKind::SlowFast).unwrap();
    let h = find_slow_fast_hopf(&sys, (0.1, 0.1)).unwrap();
    SdiContext::new(&sys, &h).unwrap()
}

pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Closed-form slow divergence integrals on the three demo systems, each
/// with fiber endpoints solved independently of the library.
pub struct SdiOracle {
    pub f: &'static str,
    pub g: &'static str,
    /// Antiderivative of f_x²/(g f_y) along the critical curve, negated.
    pub h: fn(f64) -> f64,
    /// `(α(y), ω(y))` fiber endpoints.
    pub fiber: fn(f64) -> (f64, f64),
    /// Levels where both fibers exist.
    pub levels: (f64, f64),
}

impl SdiOracle {
    pub fn value(&self, y_tilde: f64, y_bar: f64) -> f64 {
        (self.h)((self.fiber)(y_bar).0) - (self.h)((self.fiber)(y_tilde).1)
    }
}

const A: f64 = 0.3;

fn sqrt_fiber(y: f64) -> (f64, f64) {
    (-y.sqrt(), y.sqrt())
}

fn cubic_fiber(y: f64) -> (f64, f64) {
    let c = |x: f64| x * x + x * x * x - y;
    (bisect(c, -2.0 / 3.0, 0.0), bisect(c, 0.0, 1.0))
}

pub fn sdi_oracles() -> [SdiOracle; 3] {
    [
        SdiOracle {
            f: "y - x^2",
            g: "-x",
            h: |x| 2.0 * x * x,
            fiber: sqrt_fiber,
            levels: (0.01, 1.0),
        },
        SdiOracle {
            f: "y - x^2",
            g: "-x + 0.3*x^2",
            h: |x| -4.0 * x / A - 4.0 / (A * A) * (1.0 - A * x).abs().ln(),
            fiber: sqrt_fiber,
            levels: (0.01, 1.0),
        },
        SdiOracle {
            f: "y - x^2 - x^3",
            g: "-x",
            h: |x| 2.0 * x * x + 4.0 * x.powi(3) + 2.25 * x.powi(4),
            fiber: cubic_fiber,
            levels: (0.005, 0.14),
        },
    ]
}

/// 20 `(ỹ, ȳ)` pairs spread over the oracle's level range.
pub fn level_grid(o: &SdiOracle) -> Vec<(f64, f64)> {
    let (lo, hi) = o.levels;
    let at = |i: usize, n: usize| lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
    (0..5)
        .flat_map(|i| (0..4).map(move |j| (at(i, 5), at(j + 1, 6))))
        .collect()
}
