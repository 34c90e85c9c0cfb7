use std::f64::consts::{FRAC_PI_2, TAU};

use super::trajectory::{wrap_angle, Trajectory};
use crate::error::{Error, Result};
use crate::models::PlanarSystem;
use crate::numerics::ode::{DenseSolution, DenseStep, Dopri5, StepControl};
use crate::numerics::root::brent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCondition {
    MaxTime(f64),
    MaxTurns(f64),
    RadiusBelow(f64),
    RadiusAbove(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub tol: f64,
    pub max_steps: usize,
    /// Largest polar angle one step may sweep around the center.
    pub max_step_angle: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_steps: 2_000_000,
            max_step_angle: FRAC_PI_2,
        }
    }
}

const EVENT_TOL: f64 = 1e-12;

fn polar_angle(p: [f64; 2], c: [f64; 2]) -> f64 {
    (p[1] - c[1]).atan2(p[0] - c[0])
}

fn radius(p: [f64; 2], c: [f64; 2]) -> f64 {
    (p[0] - c[0]).hypot(p[1] - c[1])
}

/// Integrates `sys` from `init` in its approach direction (time reversed
/// for [`crate::models::Approach::Backward`]) until any stop condition
/// fires; the final point is event-localized.
pub fn integrate(
    sys: &PlanarSystem,
    init: [f64; 2],
    stops: &[StopCondition],
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    if !(1e-13..=1e-6).contains(&opts.tol) {
        return Err(Error::Domain(format!(
            "tolerance {} outside [1e-13, 1e-6]",
            opts.tol
        )));
    }
    if stops.is_empty() {
        return Err(Error::Domain(
            "at least one stop condition is required".into(),
        ));
    }
    let dir = sys.approach.sign();
    let c = sys.center;
    let rhs = |_t: f64, y: &[f64; 2]| {
        let v = sys.eval(y[0], y[1]);
        [dir * v[0], dir * v[1]]
    };
    let mut ctl = StepControl::new(opts.tol);
    ctl.max_steps = opts.max_steps;
    let max_time = stops
        .iter()
        .filter_map(|s| match s {
            StopCondition::MaxTime(t) => Some(*t),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);

    let mut stepper = Dopri5::new(rhs, 0.0, init, ctl);
    let mut sol = DenseSolution::new(Vec::new());
    let mut points = vec![[0.0, init[0], init[1]]];
    let mut angle_total = 0.0;
    let mut stall_steps = 0usize;
    let mut stall_angle = 0.0;
    let max_angle = opts.max_step_angle;

    loop {
        let remaining = max_time - stepper.t();
        let st = stepper.step_with(remaining, |a, b| {
            wrap_angle(polar_angle(*b, c) - polar_angle(*a, c)).abs() <= max_angle
        })?;
        let a = st.start();
        let b = st.end();
        let dtheta = wrap_angle(polar_angle(b, c) - polar_angle(a, c));

        // earliest event inside this step
        let mut hit: Option<f64> = None;
        let mut consider = |t: f64| {
            if hit.map_or(true, |h| t < h) {
                hit = Some(t);
            }
        };
        for s in stops {
            match *s {
                StopCondition::MaxTime(tm) => {
                    if st.t1() >= tm - EVENT_TOL {
                        consider(tm.min(st.t1()));
                    }
                }
                StopCondition::MaxTurns(n) => {
                    let target = n * TAU;
                    let before = angle_total;
                    let after = angle_total + dtheta;
                    if after.abs() >= target && before.abs() < target {
                        let goal = target * after.signum();
                        let theta0 = polar_angle(a, c);
                        let f = |t: f64| {
                            before + wrap_angle(polar_angle(st.eval(t), c) - theta0) - goal
                        };
                        consider(brent(f, st.t0, st.t1(), EVENT_TOL, 200)?);
                    }
                }
                StopCondition::RadiusBelow(r) => {
                    if radius(b, c) <= r && radius(a, c) > r {
                        consider(locate(&st, |p| radius(p, c) - r)?);
                    }
                }
                StopCondition::RadiusAbove(r) => {
                    if radius(b, c) >= r && radius(a, c) < r {
                        consider(locate(&st, |p| radius(p, c) - r)?);
                    }
                }
            }
        }

        sol.push(st);
        if let Some(t_end) = hit {
            sol.truncate_at(t_end);
            let p = sol.eval(t_end).expect("nonempty solution");
            if t_end > points.last().map_or(f64::NEG_INFINITY, |q| q[0]) {
                points.push([t_end, p[0], p[1]]);
            }
            break;
        }
        angle_total += dtheta;
        points.push([st.t1(), b[0], b[1]]);

        stall_steps += 1;
        stall_angle += dtheta.abs();
        if stall_steps >= 100_000 {
            if stall_angle < 0.25 * TAU {
                return Err(Error::NotSpiraling);
            }
            stall_steps = 0;
            stall_angle = 0.0;
        }
    }
    Ok(Trajectory::dense(points, sol, opts.tol, c))
}

fn locate<F: Fn([f64; 2]) -> f64>(st: &DenseStep<2>, g: F) -> Result<f64> {
    Ok(brent(|t| g(st.eval(t)), st.t0, st.t1(), EVENT_TOL, 200)?)
}

/// Spiral toward the declared center, resampled to equal polar-angle
/// increments with `per_turn` points per turn.
pub fn spiral_sample(
    sys: &PlanarSystem,
    init: [f64; 2],
    r_min: f64,
    max_turns: usize,
    opts: IntegrateOptions,
) -> Result<Trajectory> {
    if !(r_min > 0.0) {
        return Err(Error::Domain("r_min must be positive".into()));
    }
    if max_turns < 10 {
        return Err(Error::Domain(format!("max_turns = {max_turns} below 10")));
    }
    let raw = integrate(
        sys,
        init,
        &[
            StopCondition::RadiusBelow(r_min),
            StopCondition::MaxTurns(max_turns as f64),
        ],
        opts,
    )?;
    Ok(resample_by_angle(&raw, 64)?.converging(true))
}

/// Re-samples a dense trajectory at equal polar-angle increments.
pub fn resample_by_angle(tr: &Trajectory, per_turn: usize) -> Result<Trajectory> {
    let super::Interpolant::Dense(sol) = tr.interpolant() else {
        return Ok(tr.clone());
    };
    let c = tr.center;
    let dphi = TAU / per_turn as f64;
    let mut out = Vec::new();
    let mut total = 0.0;
    let mut next_k: i64 = 1;
    let first = tr.points[0];
    out.push(first);
    let orient = tr.turns.signum();
    for st in sol.steps() {
        let a = st.start();
        let theta0 = polar_angle(a, c);
        let dtheta = wrap_angle(polar_angle(st.end(), c) - theta0);
        let after = total + dtheta;
        loop {
            let goal = next_k as f64 * dphi * orient;
            let inside = if orient >= 0.0 {
                after >= goal
            } else {
                after <= goal
            };
            if !inside {
                break;
            }
            let base = total;
            let f = |t: f64| base + wrap_angle(polar_angle(st.eval(t), c) - theta0) - goal;
            let t = brent(f, st.t0, st.t1(), EVENT_TOL, 200)?;
            if t > out.last().map_or(f64::NEG_INFINITY, |q: &[f64; 3]| q[0]) {
                let p = st.eval(t);
                out.push([t, p[0], p[1]]);
            }
            next_k += 1;
        }
        total = after;
    }
    let last = *tr.points.last().expect("nonempty");
    if last[0] > out.last().map_or(f64::NEG_INFINITY, |q| q[0]) {
        out.push(last);
    }
    Ok(Trajectory::dense(out, sol.clone(), tr.tol, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        degenerate_focus, hopf_takens, DegFocusParams, HopfTakensParams, Polynomial2,
    };

    #[test]
    fn harmonic_returns_after_full_period() {
        let sys = PlanarSystem::regular(
            Polynomial2::parse("-y").unwrap(),
            Polynomial2::parse("x").unwrap(),
        );
        let opts = IntegrateOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let tr = integrate(&sys, [1.0, 0.0], &[StopCondition::MaxTime(TAU)], opts).unwrap();
        let end = tr.points.last().unwrap();
        assert!((end[0] - TAU).abs() < 1e-12);
        assert!((end[1] - 1.0).abs() < 1e-9 && end[2].abs() < 1e-9);
        assert!((tr.turns - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weak_focus_backward_matches_closed_form() {
        let sys = hopf_takens(&HopfTakensParams::new(vec![0.0]).unwrap());
        let opts = IntegrateOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let r0: f64 = 0.5;
        let tr = integrate(&sys, [r0, 0.0], &[StopCondition::MaxTurns(50.0)], opts).unwrap();
        // backward in time: angle ψ = −φ grows, dr/dψ = −r³
        for p in tr.points.iter().step_by(7) {
            let psi = p[0];
            let want = (r0.powi(-2) + 2.0 * psi).powf(-0.5);
            assert!((p[1].hypot(p[2]) - want).abs() < 1e-7, "t={psi}");
        }
        assert!((tr.turns.abs() - 50.0).abs() < 1e-9);
    }

    #[test]
    fn linear_focus_decays_exponentially() {
        let sys = degenerate_focus(&DegFocusParams::new(1, 1, 0, -1).unwrap());
        let opts = IntegrateOptions {
            tol: 1e-11,
            ..Default::default()
        };
        let tr = integrate(&sys, [1.0, 0.0], &[StopCondition::MaxTime(8.0)], opts).unwrap();
        for p in &tr.points {
            assert!((p[1].hypot(p[2]) - (-p[0]).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn radius_event_is_localized() {
        let sys = degenerate_focus(&DegFocusParams::new(1, 1, 0, -1).unwrap());
        let opts = IntegrateOptions::default();
        let tr = integrate(&sys, [1.0, 0.0], &[StopCondition::RadiusBelow(0.25)], opts).unwrap();
        let end = tr.points.last().unwrap();
        assert!((end[0] - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn spiral_sample_has_64_points_per_turn() {
        let sys = hopf_takens(&HopfTakensParams::new(vec![0.0]).unwrap());
        let tr = spiral_sample(&sys, [0.5, 0.0], 1e-3, 20, IntegrateOptions::default()).unwrap();
        assert!(tr.points.len() as f64 >= 64.0 * tr.turns.abs());
        assert!((tr.turns.abs() - 20.0).abs() < 0.5);
    }

    #[test]
    fn rejects_out_of_range_tolerance() {
        let sys = hopf_takens(&HopfTakensParams::new(vec![0.0]).unwrap());
        let opts = IntegrateOptions {
            tol: 1e-3,
            ..Default::default()
        };
        assert!(integrate(&sys, [0.5, 0.0], &[StopCondition::MaxTime(1.0)], opts).is_err());
    }
}
