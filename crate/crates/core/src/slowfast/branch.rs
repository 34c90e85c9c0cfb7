//! Critical curve f = 0, slow-fast Hopf points and fast fibers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{PlanarSystem, Polynomial2, SystemKind};
use crate::numerics::root::{brent, newton2};

const CERT_TOL: f64 = 1e-10;
const FOLD_TOL: f64 = 1e-9;

/// Partial derivatives of (f, g) needed by the slow-fast machinery.
#[derive(Debug, Clone)]
pub struct Jets {
    pub f: Polynomial2,
    pub fx: Polynomial2,
    pub fy: Polynomial2,
    pub fxx: Polynomial2,
    pub fxy: Polynomial2,
    pub g: Polynomial2,
    pub gx: Polynomial2,
}

impl Jets {
    pub fn new(sys: &PlanarSystem) -> Result<Self> {
        if sys.kind != SystemKind::SlowFast {
            return Err(Error::Domain("system is not of slow-fast kind".into()));
        }
        let fx = sys.f.dx();
        Ok(Self {
            f: sys.f.clone(),
            fy: sys.f.dy(),
            fxx: fx.dx(),
            fxy: fx.dy(),
            fx,
            g: sys.g.clone(),
            gx: sys.g.dx(),
        })
    }

    /// Solves f(x, y) = 0 for y by Newton from `guess`.
    pub fn graph_y(&self, x: f64, guess: f64) -> Option<f64> {
        let mut y = guess;
        for _ in 0..60 {
            let v = self.f.eval(x, y);
            let d = self.fy.eval(x, y);
            if d == 0.0 || !d.is_finite() {
                return None;
            }
            let step = v / d;
            y -= step;
            if step.abs() <= 1e-15 * y.abs().max(1e-300) || v == 0.0 {
                return Some(y);
            }
        }
        (self.f.eval(x, y).abs() <= CERT_TOL).then_some(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Attracting,
    Repelling,
}

/// Axis-aligned search window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Window {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// Normally hyperbolic piece of the critical curve, as a graph over x.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalBranch {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub stability: Stability,
    /// max |f| over the samples
    pub residual: f64,
}

impl CriticalBranch {
    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    fn spacing(&self) -> f64 {
        let (a, b) = self.x_range();
        (b - a) / (self.xs.len() - 1) as f64
    }

    /// Branch height at `x`, allowed slightly more than one sample spacing
    /// past the ends.
    pub fn y_at(&self, jets: &Jets, x: f64) -> Result<f64> {
        let (a, b) = self.x_range();
        let h = 1.5 * self.spacing();
        if x < a - h || x > b + h {
            return Err(Error::Domain(format!(
                "x = {x} outside branch domain [{a}, {b}]"
            )));
        }
        let i = self
            .xs
            .partition_point(|&v| v < x)
            .clamp(1, self.xs.len() - 1);
        let t = (x - self.xs[i - 1]) / (self.xs[i] - self.xs[i - 1]);
        let guess = self.ys[i - 1] + t * (self.ys[i] - self.ys[i - 1]);
        jets.graph_y(x, guess).ok_or(Error::FoldResolution { x })
    }
}

fn roots_in_y(jets: &Jets, x: f64, (y0, y1): (f64, f64), cells: usize) -> Result<Vec<f64>> {
    let h = (y1 - y0) / cells as f64;
    let mut out = Vec::new();
    let mut ya = y0;
    let mut fa = jets.f.eval(x, ya);
    for k in 1..=cells {
        let yb = y0 + h * k as f64;
        let fb = jets.f.eval(x, yb);
        if fa == 0.0 {
            out.push(ya);
        } else if fa * fb < 0.0 {
            let y = brent(|y| jets.f.eval(x, y), ya, yb, 1e-15, 200)?;
            out.push(y);
        }
        ya = yb;
        fa = fb;
    }
    if fa == 0.0 {
        out.push(y1);
    }
    for &y in &out {
        if jets.fy.eval(x, y).abs() < 1e-12 {
            return Err(Error::FoldResolution { x });
        }
    }
    Ok(out)
}

/// Critical curve pieces inside `window`, split wherever f_x vanishes.
pub fn critical_branches(sys: &PlanarSystem, window: Window) -> Result<Vec<CriticalBranch>> {
    critical_branches_with(sys, window, 401, 400)
}

pub fn critical_branches_with(
    sys: &PlanarSystem,
    window: Window,
    nx: usize,
    ny_cells: usize,
) -> Result<Vec<CriticalBranch>> {
    let jets = Jets::new(sys)?;
    let (x0, x1) = window.x;
    if !(x1 > x0 && window.y.1 > window.y.0 && nx >= 3) {
        return Err(Error::Domain("degenerate window".into()));
    }
    let hx = (x1 - x0) / (nx - 1) as f64;
    // chains of (x, y) continued while the root count stays the same
    let mut chains: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    for i in 0..nx {
        let x = x0 + hx * i as f64;
        let roots = roots_in_y(&jets, x, window.y, ny_cells)?;
        if roots.len() == open.len() {
            for (c, y) in open.iter().zip(&roots) {
                chains[*c].push((x, *y));
            }
        } else {
            open.clear();
            for y in roots {
                open.push(chains.len());
                chains.push(vec![(x, y)]);
            }
        }
    }
    if chains.iter().all(|c| c.is_empty()) {
        return Err(Error::NoBranch);
    }
    let mut out = Vec::new();
    for chain in chains {
        let mut piece: Vec<(f64, f64)> = Vec::new();
        let mut sign = 0.0;
        for (x, y) in chain {
            let fx = jets.fx.eval(x, y);
            let s = if fx.abs() < FOLD_TOL {
                0.0
            } else {
                fx.signum()
            };
            if s != sign {
                push_branch(&jets, std::mem::take(&mut piece), sign, &mut out);
                sign = s;
            }
            if s != 0.0 {
                piece.push((x, y));
            }
        }
        push_branch(&jets, piece, sign, &mut out);
    }
    if out.is_empty() {
        return Err(Error::NoBranch);
    }
    Ok(out)
}

fn push_branch(jets: &Jets, piece: Vec<(f64, f64)>, sign: f64, out: &mut Vec<CriticalBranch>) {
    if piece.len() < 2 || sign == 0.0 {
        return;
    }
    let residual = piece
        .iter()
        .map(|&(x, y)| jets.f.eval(x, y).abs())
        .fold(0.0, f64::max);
    out.push(CriticalBranch {
        xs: piece.iter().map(|p| p.0).collect(),
        ys: piece.iter().map(|p| p.1).collect(),
        stability: if sign < 0.0 {
            Stability::Attracting
        } else {
            Stability::Repelling
        },
        residual,
    });
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Concavity {
    Up,
    Down,
}

impl fmt::Display for Concavity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Concavity::Up => "up",
            Concavity::Down => "down",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCerts {
    pub f: f64,
    pub f_x: f64,
    pub f_y: f64,
    pub f_xx: f64,
    pub g: f64,
    pub g_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfPoint {
    pub location: (f64, f64),
    pub certs: HopfCerts,
    pub concavity: Concavity,
}

impl HopfPoint {
    /// +1 if the attracting branch lies at x > x_c.
    pub fn omega_side(&self) -> f64 {
        -self.certs.f_xx.signum()
    }

    /// +1 if fast fibers exist above y_c.
    pub fn fiber_side(&self) -> f64 {
        match self.concavity {
            Concavity::Up => 1.0,
            Concavity::Down => -1.0,
        }
    }
}

/// Newton-solves (f, f_x) = 0 from `guess` and certifies the Hopf conditions.
pub fn find_slow_fast_hopf(sys: &PlanarSystem, guess: (f64, f64)) -> Result<HopfPoint> {
    let jets = Jets::new(sys)?;
    let p = newton2(
        |[x, y]| {
            (
                [jets.f.eval(x, y), jets.fx.eval(x, y)],
                [
                    [jets.fx.eval(x, y), jets.fy.eval(x, y)],
                    [jets.fxx.eval(x, y), jets.fxy.eval(x, y)],
                ],
            )
        },
        [guess.0, guess.1],
        1e-15,
        100,
    )?;
    let [x, y] = p;
    let certs = HopfCerts {
        f: jets.f.eval(x, y),
        f_x: jets.fx.eval(x, y),
        f_y: jets.fy.eval(x, y),
        f_xx: jets.fxx.eval(x, y),
        g: jets.g.eval(x, y),
        g_x: jets.gx.eval(x, y),
    };
    if certs.f.abs() > CERT_TOL || certs.f_x.abs() > CERT_TOL {
        return Err(Error::Root(format!(
            "contact point residual too large: {certs:?}"
        )));
    }
    if certs.f_y.abs() <= CERT_TOL {
        return Err(Error::NotContact { f_y: certs.f_y });
    }
    if certs.g.abs() > CERT_TOL {
        return Err(Error::NotHopf(format!(
            "g ≠ 0 at the contact point (g = {:e})",
            certs.g
        )));
    }
    if certs.f_xx.abs() <= CERT_TOL {
        return Err(Error::NotHopf("f_xx = 0 at the contact point".into()));
    }
    if certs.g_x * certs.f_y >= 0.0 {
        return Err(Error::NotHopf(format!(
            "sign condition g_x·f_y < 0 fails ({:e})",
            certs.g_x * certs.f_y
        )));
    }
    let concavity = if certs.f_y * certs.f_xx < 0.0 {
        Concavity::Up
    } else {
        Concavity::Down
    };
    Ok(HopfPoint {
        location: (x, y),
        certs,
        concavity,
    })
}

/// x-component of the slow vector field −g·f_y/f_x on `branch`, extended
/// through a contact point by its limit −(g_x·f_y)/f_xx.
pub fn slow_vf_x(sys: &PlanarSystem, x: f64, branch: &CriticalBranch) -> Result<f64> {
    let jets = Jets::new(sys)?;
    let y = branch.y_at(&jets, x)?;
    let fx = jets.fx.eval(x, y);
    let fy = jets.fy.eval(x, y);
    let g = jets.g.eval(x, y);
    if fx.abs() < FOLD_TOL {
        if g.abs() > CERT_TOL {
            return Err(Error::SlowSingularity { x });
        }
        let fxx = jets.fxx.eval(x, y);
        if fxx == 0.0 {
            return Err(Error::SlowSingularity { x });
        }
        return Ok(-jets.gx.eval(x, y) * fy / fxx);
    }
    if g.abs() <= 1e-14 {
        return Err(Error::SlowSingularity { x });
    }
    Ok(-g * fy / fx)
}

/// Roots of f(·, y) on the repelling (α) and attracting (ω) sides nearest
/// the Hopf point.
pub fn fast_fiber_endpoints(sys: &PlanarSystem, y: f64, hopf: &HopfPoint) -> Result<(f64, f64)> {
    let jets = Jets::new(sys)?;
    fiber_with(&jets, y, hopf)
}

pub(crate) fn fiber_with(jets: &Jets, y: f64, hopf: &HopfPoint) -> Result<(f64, f64)> {
    let (xc, yc) = hopf.location;
    let dy = y - yc;
    if !(dy * hopf.fiber_side() > 0.0) {
        return Err(Error::NoFiber { y });
    }
    let c = &hopf.certs;
    let s0 = (2.0 * (c.f_y * dy / c.f_xx).abs()).sqrt();
    let f0 = jets.f.eval(xc, y);
    if f0 == 0.0 {
        return Err(Error::NoFiber { y });
    }
    let side_root = |dir: f64| -> Result<f64> {
        let h = s0 / 16.0;
        let mut xa = xc;
        for k in 1..=16 * 64 {
            let xb = xc + dir * h * k as f64;
            let fb = jets.f.eval(xb, y);
            if fb == 0.0 {
                return Ok(xb);
            }
            if fb.signum() != f0.signum() {
                let tol = 1e-16 * xb.abs().max(s0);
                return Ok(brent(|x| jets.f.eval(x, y), xa, xb, tol, 300)?);
            }
            xa = xb;
        }
        Err(Error::NoFiber { y })
    };
    let w = hopf.omega_side();
    let omega = side_root(w)?;
    let alpha = side_root(-w)?;
    Ok((alpha, omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sf(f: &str, g: &str) -> PlanarSystem {
        PlanarSystem::from_strings(f, g, SystemKind::SlowFast).unwrap()
    }

    #[test]
    fn parabola_splits_into_two_branches() {
        let sys = sf("y - x^2", "-x");
        let br = critical_branches(&sys, Window::new((-1.0, 1.0), (-1.0, 1.0))).unwrap();
        assert_eq!(br.len(), 2);
        for b in &br {
            assert!(b.residual <= 1e-10);
            let (a, c) = b.x_range();
            let want = if a > 0.0 {
                Stability::Attracting
            } else {
                assert!(c < 0.0);
                Stability::Repelling
            };
            assert_eq!(b.stability, want);
        }
    }

    #[test]
    fn cubic_branch_splits_at_origin_only() {
        let sys = sf("y - x^2 - x^3", "-x");
        let br = critical_branches(&sys, Window::new((-0.5, 0.5), (-1.0, 1.0))).unwrap();
        assert_eq!(br.len(), 2);
        assert!(br
            .iter()
            .any(|b| b.stability == Stability::Attracting && b.x_range().0 > 0.0));
        assert!(br
            .iter()
            .any(|b| b.stability == Stability::Repelling && b.x_range().1 < 0.0));
    }

    #[test]
    fn no_branch_without_zero_set() {
        let sys = sf("y^2 + 1", "-x");
        assert_eq!(
            critical_branches(&sys, Window::new((-1.0, 1.0), (-1.0, 1.0))),
            Err(Error::NoBranch)
        );
    }

    #[test]
    fn hopf_point_certification() {
        let h = find_slow_fast_hopf(&sf("y - x^2", "-x + 0.3*x^2"), (0.1, 0.1)).unwrap();
        assert!(h.location.0.abs() < 1e-12 && h.location.1.abs() < 1e-12);
        assert_eq!(h.certs.f_y, 1.0);
        assert_eq!(h.certs.f_xx, -2.0);
        assert_eq!(h.certs.g_x * h.certs.f_y, -1.0);
        assert_eq!(h.concavity, Concavity::Up);
        assert_eq!(h.omega_side(), 1.0);

        assert!(find_slow_fast_hopf(&sf("y - x^2", "-x - x^2 + 20*x^4"), (0.1, 0.1)).is_ok());
        match find_slow_fast_hopf(&sf("y - x^2", "1 - x"), (0.1, 0.1)) {
            Err(Error::NotHopf(m)) => assert!(m.contains("g ≠ 0")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            find_slow_fast_hopf(&sf("y - x^2", "x"), (0.1, 0.1)),
            Err(Error::NotHopf(m)) if m.contains("sign")
        ));
        assert!(matches!(
            find_slow_fast_hopf(&sf("x^2 + y^3", "-x"), (0.1, 0.2)),
            Err(Error::NotContact { .. })
        ));
    }

    #[test]
    fn slow_field_values() {
        let sys = sf("y - x^2", "-x + 0.3*x^2");
        let br = critical_branches(&sys, Window::new((-1.0, 1.0), (-1.0, 1.0))).unwrap();
        let att = br
            .iter()
            .find(|b| b.stability == Stability::Attracting)
            .unwrap();
        assert!((slow_vf_x(&sys, 0.5, att).unwrap() + 0.425).abs() < 1e-12);
        assert!((slow_vf_x(&sys, 0.0, att).unwrap() + 0.5).abs() < 1e-12);
        let sys2 = sf("y - x^2", "-x - x^2 + 20*x^4");
        assert!((slow_vf_x(&sys2, 0.0, att).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fiber_endpoints() {
        let sys = sf("y - x^2", "-x");
        let h = find_slow_fast_hopf(&sys, (0.1, 0.1)).unwrap();
        let (a, w) = fast_fiber_endpoints(&sys, 0.25, &h).unwrap();
        assert!((a + 0.5).abs() < 1e-14 && (w - 0.5).abs() < 1e-14);
        assert_eq!(
            fast_fiber_endpoints(&sys, 0.0, &h),
            Err(Error::NoFiber { y: 0.0 })
        );
        assert!(fast_fiber_endpoints(&sys, -0.1, &h).is_err());

        let cub = sf("y - x^2 - x^3", "-x");
        let h = find_slow_fast_hopf(&cub, (0.1, 0.1)).unwrap();
        let (a, w) = fast_fiber_endpoints(&cub, 0.1, &h).unwrap();
        for r in [a, w] {
            assert!((r * r + r * r * r - 0.1).abs() < 1e-14);
        }
        assert!((a + 0.41260557).abs() < 1e-8 && (w - 0.27955689).abs() < 1e-8);
    }
}
