//! Bracketing and Newton root finders.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootError {
    NoSignChange { fa: f64, fb: f64 },
    NotConverged { x: f64, fx: f64 },
    NonFinite { x: f64 },
}

/// Brent's method on `[a, b]`; `f(a)` and `f(b)` must have opposite signs
/// (or one of them be zero). Stops when the bracket is below `xtol`.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if !fa.is_finite() {
        return Err(RootError::NonFinite { x: a });
    }
    if !fb.is_finite() {
        return Err(RootError::NonFinite { x: b });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { fa, fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite { x: b });
        }
    }
    Err(RootError::NotConverged { x: b, fx: fb })
}

/// Newton's method for a 2×2 system with a supplied Jacobian.
pub fn newton2<F>(mut fj: F, x0: [f64; 2], tol: f64, max_iter: usize) -> Result<[f64; 2], RootError>
where
    F: FnMut([f64; 2]) -> ([f64; 2], [[f64; 2]; 2]),
{
    let mut x = x0;
    for _ in 0..max_iter {
        let (r, j) = fj(x);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(RootError::NotConverged {
                x: x[0],
                fx: r[0].hypot(r[1]),
            });
        }
        let dx = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dy = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        x[0] -= dx;
        x[1] -= dy;
        if !x[0].is_finite() || !x[1].is_finite() {
            return Err(RootError::NonFinite { x: x[0] });
        }
        if dx.hypot(dy) <= tol * (1.0 + x[0].hypot(x[1])) {
            let (r, _) = fj(x);
            if r[0].hypot(r[1]) <= 1e3 * tol.max(f64::EPSILON) {
                return Ok(x);
            }
        }
    }
    let (r, _) = fj(x);
    Err(RootError::NotConverged {
        x: x[0],
        fx: r[0].hypot(r[1]),
    })
}
