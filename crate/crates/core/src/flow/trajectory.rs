use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::models::ClosedSpiralKind;
use crate::numerics::ode::DenseSolution;

/// How a trajectory can be evaluated between its stored points.
#[derive(Debug, Clone)]
pub enum Interpolant {
    /// Only the stored points; linear in between.
    Samples,
    /// Continuous extension of the integrator.
    Dense(DenseSolution<2>),
    /// Exact formula, parameter = stored `t`.
    Analytic(ClosedSpiralKind),
}

/// Similarity map p ↦ s·R(θ)·p + b applied on output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub angle: f64,
    pub shift: [f64; 2],
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        angle: 0.0,
        shift: [0.0, 0.0],
    };

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.angle.sin_cos();
        [
            self.scale * (c * p[0] - s * p[1]) + self.shift[0],
            self.scale * (s * p[0] + c * p[1]) + self.shift[1],
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `(t, x, y)` with strictly increasing `t`.
    pub points: Vec<[f64; 3]>,
    pub tol: f64,
    /// Winding around `center`, in turns.
    pub turns: f64,
    pub center: [f64; 2],
    /// The curve continues toward `center` beyond its last point.
    pub converges_to_center: bool,
    interp: Interpolant,
    map: Similarity,
}

impl Trajectory {
    pub fn from_points(points: Vec<[f64; 3]>, center: [f64; 2]) -> Self {
        let turns = winding(&points, center);
        Self {
            points,
            tol: 0.0,
            turns,
            center,
            converges_to_center: false,
            interp: Interpolant::Samples,
            map: Similarity::IDENTITY,
        }
    }

    pub fn dense(points: Vec<[f64; 3]>, sol: DenseSolution<2>, tol: f64, center: [f64; 2]) -> Self {
        let turns = winding(&points, center);
        Self {
            points,
            tol,
            turns,
            center,
            converges_to_center: false,
            interp: Interpolant::Dense(sol),
            map: Similarity::IDENTITY,
        }
    }

    pub fn analytic(kind: ClosedSpiralKind, points: Vec<[f64; 3]>, turns: f64) -> Self {
        Self {
            points,
            tol: 0.0,
            turns,
            center: [0.0, 0.0],
            converges_to_center: true,
            interp: Interpolant::Analytic(kind),
            map: Similarity::IDENTITY,
        }
    }

    pub fn converging(mut self, yes: bool) -> Self {
        self.converges_to_center = yes;
        self
    }

    pub fn interpolant(&self) -> &Interpolant {
        &self.interp
    }

    /// Copy with a similarity applied to every point (and the center).
    pub fn transformed(&self, s: Similarity) -> Self {
        let composed = Similarity {
            scale: s.scale * self.map.scale,
            angle: s.angle + self.map.angle,
            shift: s.apply(self.map.shift),
        };
        let points = self
            .points
            .iter()
            .map(|p| {
                let q = s.apply([p[1], p[2]]);
                [p[0], q[0], q[1]]
            })
            .collect();
        Self {
            points,
            tol: self.tol,
            turns: self.turns,
            center: s.apply(self.center),
            converges_to_center: self.converges_to_center,
            interp: self.interp.clone(),
            map: composed,
        }
    }

    pub fn t_range(&self) -> (f64, f64) {
        (
            self.points.first().map_or(0.0, |p| p[0]),
            self.points.last().map_or(0.0, |p| p[0]),
        )
    }

    /// Position at time `t`, clamped to the stored range.
    pub fn eval(&self, t: f64) -> [f64; 2] {
        let raw = match &self.interp {
            Interpolant::Dense(sol) => sol.eval(t).unwrap_or([0.0, 0.0]),
            Interpolant::Analytic(kind) => kind.point(t),
            Interpolant::Samples => return self.linear(t),
        };
        self.map.apply(raw)
    }

    fn linear(&self, t: f64) -> [f64; 2] {
        let i = self.points.partition_point(|p| p[0] < t);
        if i == 0 {
            return [self.points[0][1], self.points[0][2]];
        }
        if i >= self.points.len() {
            let p = self.points[self.points.len() - 1];
            return [p[1], p[2]];
        }
        let (a, b) = (self.points[i - 1], self.points[i]);
        let w = (t - a[0]) / (b[0] - a[0]);
        [a[1] + w * (b[1] - a[1]), a[2] + w * (b[2] - a[2])]
    }

    /// Largest distance between consecutive stored points.
    pub fn max_spacing(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1][1] - w[0][1]).hypot(w[1][2] - w[0][2]))
            .fold(0.0, f64::max)
    }

    /// Finest spacing the trajectory can be refined to, if limited.
    pub fn resolution_limit(&self) -> Option<f64> {
        match self.interp {
            Interpolant::Samples => Some(self.max_spacing()),
            _ => None,
        }
    }

    pub fn bbox(&self) -> [f64; 4] {
        let mut b = [
            f64::INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        ];
        for p in &self.points {
            b[0] = b[0].min(p[1]);
            b[1] = b[1].min(p[2]);
            b[2] = b[2].max(p[1]);
            b[3] = b[3].max(p[2]);
        }
        b
    }

    /// Visits a polyline approximating the curve with consecutive vertices at
    /// most `spacing` apart (when the interpolant allows refinement).
    pub fn for_each_vertex<F: FnMut([f64; 2])>(&self, spacing: f64, mut visit: F) {
        if self.points.is_empty() {
            return;
        }
        match &self.interp {
            Interpolant::Samples => {
                for p in &self.points {
                    visit([p[1], p[2]]);
                }
            }
            Interpolant::Analytic(kind) => {
                let (lo, hi) = self.t_range();
                let max_dt = TAU / 64.0;
                let mut s = lo;
                visit(self.map.apply(kind.point(s)));
                let inner = spacing / self.map.scale;
                while s < hi {
                    // speed is monotone over small steps for all closed forms
                    let v = kind.speed(s).max(kind.speed((s + max_dt).min(hi)));
                    let ds = (inner / v.max(1e-300)).min(max_dt);
                    s = (s + ds).min(hi);
                    visit(self.map.apply(kind.point(s)));
                }
            }
            Interpolant::Dense(sol) => {
                let mut first = true;
                for st in sol.steps() {
                    let a = st.start();
                    if first {
                        visit(self.map.apply(a));
                        first = false;
                    }
                    // arc length estimate from a few interior samples
                    let mut len = 0.0;
                    let mut prev = a;
                    for q in 1..=4 {
                        let p = st.eval(st.t0 + st.h * q as f64 / 4.0);
                        len += (p[0] - prev[0]).hypot(p[1] - prev[1]);
                        prev = p;
                    }
                    let pieces = ((len * self.map.scale / spacing).ceil() as usize).max(1);
                    for q in 1..=pieces {
                        let p = st.eval(st.t0 + st.h * q as f64 / pieces as f64);
                        visit(self.map.apply(p));
                    }
                }
            }
        }
    }

    /// Two-column `x y` or three-column `t x y` ASCII dump.
    pub fn to_ascii(&self, with_time: bool) -> String {
        let mut out = String::new();
        for p in &self.points {
            if with_time {
                let _ = writeln!(out, "{:.17e} {:.17e} {:.17e}", p[0], p[1], p[2]);
            } else {
                let _ = writeln!(out, "{:.17e} {:.17e}", p[1], p[2]);
            }
        }
        out
    }
}

/// Net winding of the sampled polyline around `center`, in turns.
pub fn winding(points: &[[f64; 3]], center: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        let a = (w[0][2] - center[1]).atan2(w[0][1] - center[0]);
        let b = (w[1][2] - center[1]).atan2(w[1][1] - center[0]);
        total += wrap_angle(b - a);
    }
    total / TAU
}

pub fn wrap_angle(d: f64) -> f64 {
    let mut d = d % TAU;
    if d > std::f64::consts::PI {
        d -= TAU;
    } else if d < -std::f64::consts::PI {
        d += TAU;
    }
    d
}
