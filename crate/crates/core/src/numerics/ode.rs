//! Dormand–Prince 5(4) with the 4th-order continuous extension.
//!
//! The stepper is driven one accepted step at a time; every accepted step
//! yields a [`DenseStep`] that interpolates the solution over that step.
//! Callers build stop conditions and event localization on top of it.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Smallest admissible step before the integrator gives up.
pub const H_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    StepUnderflow { t: f64, state: Vec<f64> },
    BudgetExceeded { steps: usize, t: f64 },
    NonFinite { t: f64 },
}

/// Interpolant of one accepted step, valid on `[t0, t0 + h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rc: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.rc[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = self.rc[0];
        for (yi, d) in y.iter_mut().zip(self.rc[1]) {
            *yi += d;
        }
        y
    }

    /// Evaluates the continuous extension at `t` (clamped to the step).
    pub fn eval(&self, t: f64) -> [f64; N] {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.rc[0][i]
                + theta
                    * (self.rc[1][i]
                        + theta1
                            * (self.rc[2][i] + theta * (self.rc[3][i] + theta1 * self.rc[4][i])));
        }
        y
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

pub struct Dopri5<const N: usize, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    ctl: StepControl,
    steps: usize,
    rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], ctl: StepControl) -> Self {
        let k1 = f(t0, &y0);
        let mut s = Self {
            f,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            ctl,
            steps: 0,
            rejected: 0,
        };
        s.h = s.initial_step();
        s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    fn norm(&self, v: &[f64; N], scale_from: &[f64; N], scale_to: &[f64; N]) -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = self.ctl.atol + self.ctl.rtol * scale_from[i].abs().max(scale_to[i].abs());
            acc += (v[i] / sc).powi(2);
        }
        (acc / N as f64).sqrt()
    }

    // Hairer & Wanner's starting step heuristic.
    fn initial_step(&self) -> f64 {
        let d0 = self.norm(&self.y, &self.y, &self.y);
        let d1 = self.norm(&self.k1, &self.y, &self.y);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(self.ctl.h_max);
        let y1 = axpy(&self.y, h0, &[(1.0, &self.k1)]);
        let f1 = (self.f)(self.t + h0, &y1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = f1[i] - self.k1[i];
        }
        let d2 = self.norm(&diff, &self.y, &self.y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.ctl.h_max)
    }

    /// Takes one accepted step no longer than `h_cap`.
    ///
    /// `accept` can veto a step that passed the error test (e.g. a step that
    /// sweeps too large an angle); vetoed steps are retried at half size.
    pub fn step_with<A>(&mut self, h_cap: f64, accept: A) -> Result<DenseStep<N>, OdeError>
    where
        A: Fn(&[f64; N], &[f64; N]) -> bool,
    {
        let f = &self.f;
        loop {
            if self.steps >= self.ctl.max_steps {
                return Err(OdeError::BudgetExceeded {
                    steps: self.steps,
                    t: self.t,
                });
            }
            let capped = self.h.min(h_cap).min(self.ctl.h_max);
            let h = capped;
            if h < H_FLOOR * self.t.abs().max(1.0) {
                return Err(OdeError::StepUnderflow {
                    t: self.t,
                    state: self.y.to_vec(),
                });
            }
            let t = self.t;
            let y = &self.y;
            let k1 = &self.k1;
            let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
            let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = f(
                t + C4 * h,
                &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
            );
            let k5 = f(
                t + C5 * h,
                &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let ysti = axpy(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            );
            let k6 = f(t + h, &ysti);
            let y1 = axpy(
                y,
                h,
                &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let k7 = f(t + h, &y1);
            let mut err = [0.0; N];
            for i in 0..N {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            if y1.iter().any(|v| !v.is_finite()) {
                self.rejected += 1;
                self.h = h * 0.25;
                if !h.is_finite() || self.h < H_FLOOR {
                    return Err(OdeError::NonFinite { t });
                }
                continue;
            }
            let en = self.norm(&err, y, &y1);
            let fac = if en == 0.0 {
                5.0
            } else {
                (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
            };
            if en <= 1.0 && accept(y, &y1) {
                let mut rc = [[0.0; N]; 5];
                for i in 0..N {
                    let dy = y1[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rc[0][i] = y[i];
                    rc[1][i] = dy;
                    rc[2][i] = bspl;
                    rc[3][i] = dy - h * k7[i] - bspl;
                    rc[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let dense = DenseStep { t0: t, h, rc };
                self.t = t + h;
                self.y = y1;
                self.k1 = k7;
                self.steps += 1;
                // a step truncated by h_cap should not shrink the next proposal
                self.h = if capped < self.h {
                    self.h.max(h * fac)
                } else {
                    h * fac
                };
                return Ok(dense);
            }
            self.rejected += 1;
            self.h = if en <= 1.0 { h * 0.5 } else { h * fac.min(1.0) };
        }
    }

    pub fn step(&mut self, h_cap: f64) -> Result<DenseStep<N>, OdeError> {
        self.step_with(h_cap, |_, _| true)
    }

    /// Integrates to `t_end`, returning every dense step.
    pub fn advance_to(&mut self, t_end: f64) -> Result<Vec<DenseStep<N>>, OdeError> {
        let mut out = Vec::new();
        while self.t < t_end {
            let remaining = t_end - self.t;
            if remaining <= 1e-14 * t_end.abs().max(1.0) {
                break;
            }
            out.push(self.step(remaining)?);
        }
        Ok(out)
    }
}

/// A sequence of contiguous dense steps forming a global interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution<const N: usize> {
    steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseSolution<N> {
    pub fn new(steps: Vec<DenseStep<N>>) -> Self {
        Self { steps }
    }

    pub fn push(&mut self, s: DenseStep<N>) {
        self.steps.push(s);
    }

    pub fn steps(&self) -> &[DenseStep<N>] {
        &self.steps
    }

    pub fn t_start(&self) -> f64 {
        self.steps.first().map_or(0.0, |s| s.t0)
    }

    pub fn t_end(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.t1())
    }

    /// Index of the step covering `t`.
    pub fn locate(&self, t: f64) -> Option<usize> {
        if self.steps.is_empty() {
            return None;
        }
        let i = self.steps.partition_point(|s| s.t1() < t);
        Some(i.min(self.steps.len() - 1))
    }

    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        self.locate(t).map(|i| self.steps[i].eval(t))
    }

    pub fn truncate_at(&mut self, t: f64) {
        if let Some(i) = self.locate(t) {
            self.steps.truncate(i + 1);
            if let Some(last) = self.steps.last_mut() {
                let full = *last;
                let y_end = full.eval(t);
                // re-anchor the final step so its end matches the cut point
                let h_new = t - full.t0;
                if h_new > 0.0 && h_new < full.h {
                    *last = resample_step(&full, h_new, y_end);
                }
            }
        }
    }
}

// Builds a cubic Hermite-like restriction of a dense step to [t0, t0+h_new]
// by sampling the original interpolant; keeps the endpoint exact.
fn resample_step<const N: usize>(s: &DenseStep<N>, h_new: f64, y_end: [f64; N]) -> DenseStep<N> {
    // Fit the quartic form through 5 samples of the original interpolant.
    let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
    let ys: Vec<[f64; N]> = ts.iter().map(|th| s.eval(s.t0 + th * h_new)).collect();
    let mut rc = [[0.0; N]; 5];
    for i in 0..N {
        let y0 = ys[0][i];
        let dy = y_end[i] - y0;
        // p(θ) = y0 + θ(dy + (1-θ)(a + θ(b + (1-θ)c))) ; solve a,b,c from θ=.25,.5,.75
        let mut m = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for (row, k) in [1usize, 2, 3].iter().enumerate() {
            let th = ts[*k];
            let th1 = 1.0 - th;
            let base = th * th1;
            m[row] = [base, base * th, base * th * th1];
            rhs[row] = ys[*k][i] - y0 - th * dy;
        }
        let sol = solve3(m, rhs);
        rc[0][i] = y0;
        rc[1][i] = dy;
        rc[2][i] = sol[0];
        rc[3][i] = sol[1];
        rc[4][i] = sol[2];
    }
    DenseStep {
        t0: s.t0,
        h: h_new,
        rc,
    }
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &c| m[a][col].abs().total_cmp(&m[c][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let mut acc = b[r];
        for c in (r + 1)..3 {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    x
}
