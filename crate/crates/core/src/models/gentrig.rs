//! Generalized trigonometric functions Cs, Sn solving
//! Cs' = −n Sn^{2n−1}, Sn' = m Cs^{2m−1}, (Cs, Sn)(0) = (1, 0).

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::numerics::ode::{DenseSolution, Dopri5, StepControl};
use crate::numerics::root::brent;

pub const DEFECT_LIMIT: f64 = 1e-9;

/// One period of (Cs, Sn) together with the running integral
/// H(φ) = ∫₀^φ Sn^{n−1} Cs^{m−1}, which drives the radial equation of the
/// degenerate focus.
#[derive(Debug, Clone)]
pub struct GenTrigTable {
    pub m: u32,
    pub n: u32,
    pub period: f64,
    /// `(φ, Cs, Sn)` on a uniform grid over `[0, period]`.
    pub samples: Vec<[f64; 3]>,
    /// H over one full period.
    pub h_period: f64,
    pub max_defect: f64,
    dense: DenseSolution<3>,
}

pub fn period_formula(m: u32, n: u32) -> f64 {
    let a = 1.0 / (2.0 * m as f64);
    let b = 1.0 / (2.0 * n as f64);
    2.0 / (m as f64 * n as f64) * gamma(a) * gamma(b) / gamma(a + b)
}

fn ipow(v: f64, e: u32) -> f64 {
    v.powi(e as i32)
}

fn rhs(m: u32, n: u32) -> impl Fn(f64, &[f64; 3]) -> [f64; 3] {
    let (mf, nf) = (m as f64, n as f64);
    move |_phi, s| {
        let (c, sn) = (s[0], s[1]);
        [
            -nf * ipow(sn, 2 * n - 1),
            mf * ipow(c, 2 * m - 1),
            ipow(sn, n - 1) * ipow(c, m - 1),
        ]
    }
}

pub fn gen_trig(m: u32, n: u32, grid_size: usize) -> Result<GenTrigTable> {
    gen_trig_with_tol(m, n, grid_size, 1e-13)
}

pub fn gen_trig_with_tol(m: u32, n: u32, grid_size: usize, tol: f64) -> Result<GenTrigTable> {
    if m % 2 == 0 || n % 2 == 0 || m == 0 || n == 0 {
        return Err(Error::Domain(format!(
            "m = {m}, n = {n} must be odd and positive"
        )));
    }
    if grid_size < 1000 {
        return Err(Error::Domain(format!("grid_size = {grid_size} below 1000")));
    }
    let f = rhs(m, n);
    let mut ctl = StepControl::new(tol);
    // the solution has sharp turns for large exponents; cap the step
    ctl.h_max = period_formula(m, n) / 64.0;

    // quarter period: first zero of Cs
    let mut stepper = Dopri5::new(&f, 0.0, [1.0, 0.0, 0.0], ctl);
    let mut dense = DenseSolution::new(Vec::new());
    let quarter = loop {
        let st = stepper.step(f64::INFINITY)?;
        dense.push(st);
        if st.end()[0] <= 0.0 {
            let root = brent(|t| st.eval(t)[0], st.t0, st.t1(), 1e-15, 200)?;
            break root;
        }
        if stepper.t() > 10.0 * period_formula(m, n) {
            return Err(Error::Accuracy {
                defect: f64::INFINITY,
                limit: DEFECT_LIMIT,
            });
        }
    };
    let period = 4.0 * quarter;
    while stepper.t() < period {
        let st = stepper.step(period - stepper.t())?;
        dense.push(st);
        if period - stepper.t() <= 1e-14 * period {
            break;
        }
    }
    let end = stepper.y();
    let h_period = end[2];

    let mut samples = Vec::with_capacity(grid_size + 1);
    let mut max_defect: f64 = (ipow(end[0], 2 * m) + ipow(end[1], 2 * n) - 1.0).abs();
    for i in 0..=grid_size {
        let phi = period * i as f64 / grid_size as f64;
        let v = dense.eval(phi).expect("dense output covers the period");
        max_defect = max_defect.max((ipow(v[0], 2 * m) + ipow(v[1], 2 * n) - 1.0).abs());
        samples.push([phi, v[0], v[1]]);
    }
    // first return and symmetry defects
    max_defect = max_defect.max((end[0] - 1.0).abs()).max(end[1].abs());
    for i in 0..=grid_size / 2 {
        let a = samples[i];
        let b = samples[grid_size - i];
        max_defect = max_defect.max((a[1] - b[1]).abs()).max((a[2] + b[2]).abs());
    }
    if max_defect > DEFECT_LIMIT {
        return Err(Error::Accuracy {
            defect: max_defect,
            limit: DEFECT_LIMIT,
        });
    }
    Ok(GenTrigTable {
        m,
        n,
        period,
        samples,
        h_period,
        max_defect,
        dense,
    })
}

impl GenTrigTable {
    fn reduce(&self, phi: f64) -> (f64, f64) {
        let turns = (phi / self.period).floor();
        (turns, phi - turns * self.period)
    }

    /// `(Cs(φ), Sn(φ))` for any real φ.
    pub fn cs_sn(&self, phi: f64) -> (f64, f64) {
        let (_, r) = self.reduce(phi);
        let v = self.dense.eval(r).expect("nonempty table");
        (v[0], v[1])
    }

    /// H(φ) extended by H(φ + T) = H(φ) + H(T).
    pub fn h(&self, phi: f64) -> f64 {
        let (turns, r) = self.reduce(phi);
        turns * self.h_period + self.dense.eval(r).expect("nonempty table")[2]
    }

    /// Exact value of H over one period, 2π/(mn).
    pub fn h_period_exact(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.m as f64 * self.n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn classical_case() {
        let t = gen_trig(1, 1, 2000).unwrap();
        assert!((t.period - 2.0 * PI).abs() < 1e-6);
        for &[phi, c, s] in t.samples.iter().step_by(97) {
            assert!((c - phi.cos()).abs() < 1e-9 && (s - phi.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn period_matches_gamma_formula() {
        for (m, n) in [(5, 3), (3, 3), (11, 3), (21, 11), (3, 5)] {
            let t = gen_trig(m, n, 1000).unwrap();
            let want = period_formula(m, n);
            assert!(((t.period - want) / want).abs() < 1e-6, "m={m} n={n}");
        }
        // (2/15) Γ(1/10) Γ(1/6) / Γ(4/15)
        assert!((period_formula(5, 3) - 2.084_824_491_254_941_8).abs() < 1e-9);
    }

    #[test]
    fn h_over_a_period_is_two_pi_over_mn() {
        for (m, n) in [(1, 1), (3, 3), (5, 3), (11, 3), (21, 11)] {
            let t = gen_trig(m, n, 1000).unwrap();
            assert!(
                (t.h_period - t.h_period_exact()).abs() < 1e-9,
                "m={m} n={n}"
            );
        }
    }

    #[test]
    fn conserved_at_half_period() {
        let t = gen_trig(5, 3, 1000).unwrap();
        let (c, s) = t.cs_sn(t.period / 2.0);
        assert!((c.powi(10) + s.powi(6) - 1.0).abs() < 1e-9);
        assert!((c + 1.0).abs() < 1e-9 && s.abs() < 1e-9);
        assert!(t.max_defect <= DEFECT_LIMIT);
    }

    #[test]
    fn small_grid_rejected() {
        assert!(matches!(gen_trig(3, 3, 10), Err(Error::Domain(_))));
    }
}
