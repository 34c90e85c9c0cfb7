//! One-dimensional return maps: the radial equation of degenerate foci and
//! the radial part of Hopf–Takens fields near a focus or a limit cycle.

use crate::error::{Error, Result};
use crate::fracdim::MonotoneSequence;
use crate::models::{DegFocusParams, GenTrigTable, HopfTakensParams};
use crate::numerics::ode::{Dopri5, StepControl};
use crate::numerics::root::brent;

use std::f64::consts::TAU;

/// Radii at multiples of the period T of the solution of
/// dr/dφ = ±Sn^{n−1}Cs^{m−1} r^{p+1}, p = 2mnk, from the closed form
/// r^{−p} = r0^{−p} ∓ p·j·c_T with c_T = ∫₀^T Sn^{n−1}Cs^{m−1} = 2π/(mn).
pub fn radial_map(
    p: &DegFocusParams,
    table: &GenTrigTable,
    r0: f64,
    turns: usize,
) -> Result<MonotoneSequence> {
    if p.k == 0 {
        return Err(Error::Domain("radial map needs k ≥ 1".into()));
    }
    if table.m != p.m || table.n != p.n {
        return Err(Error::Domain(
            "trigonometric table does not match (m, n)".into(),
        ));
    }
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Domain("r0 must be positive".into()));
    }
    let pe = p.p() as f64;
    let c_t = table.h_period_exact();
    let scale = pe * c_t * r0.powf(pe);
    let mut values = Vec::with_capacity(turns + 1);
    values.push(r0);
    for j in 1..=turns {
        let arg = -(p.sign as f64) * scale * j as f64;
        if p.sign > 0 && arg <= -1.0 {
            return Err(Error::BlowUp { turn: j });
        }
        let r = r0 * (-arg.ln_1p() / pe).exp();
        if r == values[j - 1] {
            return Err(Error::DegenerateSequence(format!(
                "radius stalls at turn {j} (r0^p·p·c_T = {scale:e}); start closer to r = 1"
            )));
        }
        values.push(r);
    }
    if p.sign > 0 {
        return Err(Error::Domain(
            "sign + orbit recedes from the focus; use sign − or reverse time".into(),
        ));
    }
    MonotoneSequence::new(values, 0.0)
}

/// Same map by integrating (Cs, Sn, r) over each period, restarting
/// (Cs, Sn) at (1, 0).
pub fn radial_map_integrated(
    p: &DegFocusParams,
    table: &GenTrigTable,
    r0: f64,
    turns: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let (m, n) = (p.m as i32, p.n as i32);
    let (mf, nf) = (p.m as f64, p.n as f64);
    let pe = p.p() as i32;
    let sign = p.sign as f64;
    let rhs = move |_: f64, y: &[f64; 3]| {
        let (c, s, r) = (y[0], y[1], y[2]);
        [
            -nf * s.powi(2 * n - 1),
            mf * c.powi(2 * m - 1),
            sign * s.powi(n - 1) * c.powi(m - 1) * r.powi(pe + 1),
        ]
    };
    let mut ctl = StepControl::new(tol);
    ctl.h_max = table.period / 64.0;
    let mut out = vec![r0];
    let mut r = r0;
    for j in 1..=turns {
        let mut st = Dopri5::new(rhs, 0.0, [1.0, 0.0, r], ctl);
        st.advance_to(table.period)?;
        r = st.y()[2];
        if !r.is_finite() || r > 1e150 {
            return Err(Error::BlowUp { turn: j });
        }
        out.push(r);
    }
    Ok(out)
}

/// Sign σ making dr/dψ = σ·r·P(r²) approach the focus.
fn focus_orientation(p: &HopfTakensParams) -> f64 {
    -p.first_nonzero().1.signum()
}

/// Poincaré orbit of the Hopf–Takens focus: r at ψ = 2πj along the
/// direction of time in which the spiral tends to the origin.
pub fn hopf_takens_focus_orbit(
    p: &HopfTakensParams,
    r0: f64,
    turns: usize,
    rtol: f64,
) -> Result<MonotoneSequence> {
    if !(r0 > 0.0) {
        return Err(Error::Domain("r0 must be positive".into()));
    }
    let sigma = focus_orientation(p);
    let pc = p.clone();
    let rhs = move |_: f64, y: &[f64; 1]| [sigma * y[0] * pc.radial_poly(y[0] * y[0])];
    sample_turns(rhs, r0, turns, rtol).and_then(|v| MonotoneSequence::new(v, 0.0))
}

fn sample_turns<F: Fn(f64, &[f64; 1]) -> [f64; 1]>(
    rhs: F,
    y0: f64,
    turns: usize,
    rtol: f64,
) -> Result<Vec<f64>> {
    let ctl = StepControl {
        rtol,
        atol: 0.0,
        h_max: TAU / 8.0,
        max_steps: 10_000_000,
    };
    let mut st = Dopri5::new(rhs, 0.0, [y0], ctl);
    let mut out = vec![y0];
    for j in 1..=turns {
        st.advance_to(TAU * j as f64)?;
        let v = st.y()[0];
        if !v.is_finite() {
            return Err(Error::BlowUp { turn: j });
        }
        out.push(v);
    }
    Ok(out)
}

/// Coefficients b_i of P(a² + v) = Σ b_i v^i (Taylor shift).
fn shifted_coeffs(p: &HopfTakensParams, w0: f64) -> Vec<f64> {
    let mut c: Vec<f64> = p.a.clone();
    c.push(1.0);
    let n = c.len();
    for i in 0..n {
        for k in (i..n - 1).rev() {
            c[k] += w0 * c[k + 1];
        }
    }
    c
}

/// Radii a > 0 with P(a²) = 0 found from sign changes of P on (0, w_max];
/// roots of even multiplicity are returned only when they are exact grid
/// hits.
pub fn cycle_radii(p: &HopfTakensParams) -> Vec<f64> {
    let bound = 1.0 + p.a.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let n = 20_000;
    let mut roots = Vec::new();
    let mut prev_w = 0.0;
    let mut prev_v = p.radial_poly(0.0);
    for i in 1..=n {
        let w = bound * i as f64 / n as f64;
        let v = p.radial_poly(w);
        if v == 0.0 {
            roots.push(w.sqrt());
        } else if prev_v != 0.0 && v.signum() != prev_v.signum() {
            if let Ok(r) = brent(|x| p.radial_poly(x), prev_w, w, 1e-15, 200) {
                roots.push(r.sqrt());
            }
        }
        prev_w = w;
        prev_v = v;
    }
    roots
}

/// Multiplicity of the cycle r = a as a zero of r ↦ P(r²).
pub fn cycle_multiplicity(p: &HopfTakensParams, a: f64) -> usize {
    let b = shifted_coeffs(p, a * a);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    b.iter()
        .enumerate()
        .skip(1)
        .find(|(_, v)| v.abs() > 1e-9 * scale)
        .map(|(i, _)| i)
        .unwrap_or(b.len() - 1)
}

/// Return-map orbit of the deviation s = r − a from the cycle r = a,
/// started at `s0` (negative inside), in the time direction approaching
/// the cycle. Integrated in s itself with pure relative tolerance, so the
/// orbit stays accurate far below the resolution of r.
pub fn cycle_deviation_orbit(
    p: &HopfTakensParams,
    a: f64,
    s0: f64,
    turns: usize,
    rtol: f64,
) -> Result<MonotoneSequence> {
    if !(a > 0.0) || s0 == 0.0 || !(a + s0 > 0.0) {
        return Err(Error::Domain("need a > 0, s0 ≠ 0 and a + s0 > 0".into()));
    }
    let mut b = shifted_coeffs(p, a * a);
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if b[0].abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::Domain(format!(
            "r = {a} is not a cycle (P(a²) = {:e})",
            b[0]
        )));
    }
    b[0] = 0.0;
    let mult = cycle_multiplicity(p, a);
    let lead = b[mult];
    // Q(s) ≈ lead·(2a)^mult·s^mult near s = 0
    let sigma = -(lead * s0.powi(mult as i32 - 1)).signum();
    let q = move |s: f64| {
        let v = s * (2.0 * a + s);
        let mut acc = 0.0;
        for c in b.iter().rev() {
            acc = acc * v + c;
        }
        acc
    };
    let rhs = move |_: f64, y: &[f64; 1]| [sigma * (a + y[0]) * q(y[0])];
    let v = sample_turns(rhs, s0, turns, rtol)?;
    MonotoneSequence::new(v, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gen_trig;
    use std::f64::consts::PI;

    #[test]
    fn linear_case_matches_separation_of_variables() {
        let t = gen_trig(1, 1, 2000).unwrap();
        let p = DegFocusParams::new(1, 1, 1, -1).unwrap();
        let s = radial_map(&p, &t, 0.5, 20).unwrap();
        for (j, r) in s.values().iter().enumerate() {
            let want = (4.0 + 4.0 * PI * j as f64).powf(-0.5);
            assert!((r - want).abs() < 1e-14, "j={j}");
        }
    }

    #[test]
    fn closed_form_matches_integration() {
        let t = gen_trig(3, 3, 2000).unwrap();
        let p = DegFocusParams::new(3, 3, 1, -1).unwrap();
        let s = radial_map(&p, &t, 0.95, 12).unwrap();
        let v = radial_map_integrated(&p, &t, 0.95, 12, 1e-12).unwrap();
        for (a, b) in s.values().iter().zip(&v) {
            assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
        }
        let t = gen_trig(5, 3, 4000).unwrap();
        let p = DegFocusParams::new(5, 3, 2, -1).unwrap();
        let s = radial_map(&p, &t, 0.99, 5).unwrap();
        let v = radial_map_integrated(&p, &t, 0.99, 5, 1e-12).unwrap();
        for (a, b) in s.values().iter().zip(&v) {
            assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn power_law_tail() {
        let t = gen_trig(5, 3, 4000).unwrap();
        let p = DegFocusParams::new(5, 3, 2, -1).unwrap();
        let s = radial_map(&p, &t, 1.0, 2000).unwrap();
        let v = s.values();
        for w in v.windows(2) {
            assert!(w[1] < w[0]);
        }
        // r_j ∝ j^{−1/p}
        let (a, b) = (v[1000], v[2000]);
        let slope = (b / a).ln() / 2f64.ln();
        assert!((slope + 1.0 / 60.0).abs() < 1e-3, "{slope}");
        assert!(v[2000] / v[1999] > 1.0 - 1.0 / 1999.0);
    }

    #[test]
    fn zero_turns_and_blow_up() {
        let t = gen_trig(1, 1, 2000).unwrap();
        let p = DegFocusParams::new(1, 1, 1, -1).unwrap();
        assert_eq!(radial_map(&p, &t, 0.3, 0).unwrap().values(), &[0.3]);
        let p = DegFocusParams::new(1, 1, 1, 1).unwrap();
        assert!(matches!(
            radial_map(&p, &t, 0.5, 10),
            Err(Error::BlowUp { turn: 1 })
        ));
    }

    #[test]
    fn weak_focus_orbit() {
        let p = HopfTakensParams::new(vec![0.0]).unwrap();
        let s = hopf_takens_focus_orbit(&p, 0.5, 30, 1e-12).unwrap();
        for (j, r) in s.values().iter().enumerate() {
            let want = (4.0 + 4.0 * PI * j as f64).powf(-0.5);
            assert!((r - want).abs() < 1e-10 * want);
        }
    }

    #[test]
    fn cycle_orbit_is_geometric_on_both_sides() {
        let p = HopfTakensParams::new(vec![-0.3]).unwrap();
        let radii = cycle_radii(&p);
        assert_eq!(radii.len(), 1);
        let a = radii[0];
        assert!((a - 0.3f64.sqrt()).abs() < 1e-14);
        assert_eq!(cycle_multiplicity(&p, a), 1);
        for s0 in [0.05, -0.05] {
            let s = cycle_deviation_orbit(&p, a, s0, 40, 1e-12).unwrap();
            let v = s.values();
            // linearized contraction per turn e^{−2a²·2π}
            let want = (-2.0 * 0.3 * TAU).exp();
            let ratio = v[40] / v[39];
            assert!((ratio - want).abs() < 1e-6 * want, "{ratio} vs {want}");
            assert!(v[40].abs() < 1e-60);
        }
    }

    #[test]
    fn double_cycle_multiplicity() {
        // P(w) = (w − 0.25)² = w² − 0.5w + 0.0625
        let p = HopfTakensParams::new(vec![0.0625, -0.5]).unwrap();
        assert_eq!(cycle_multiplicity(&p, 0.5), 2);
        let s = cycle_deviation_orbit(&p, 0.5, 0.05, 200, 1e-12).unwrap();
        assert!(s.values()[200] < s.values()[100]);
    }
}
