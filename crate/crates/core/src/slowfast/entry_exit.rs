//! Entry-exit sequences generated by the relation I = 0.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::sdi::{Assumption2, SdiContext};
use crate::error::{Error, Result};
use crate::fracdim::sequence::MIN_ESTIMATION_LEN;
use crate::fracdim::MonotoneSequence;
use crate::numerics::root::brent;

pub const DEFAULT_LEN: usize = 40;
pub const GAP_FLOOR: f64 = 1e-13;
pub const RESIDUAL_LIMIT: f64 = 1e-9;
pub const ASSUMPTION_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    Hopf,
    /// Canard mode around the balanced level y*.
    Canard(f64),
}

impl Mode {
    pub fn limit(self, ctx: &SdiContext) -> f64 {
        match self {
            Mode::Hopf => ctx.hopf().location.1,
            Mode::Canard(y) => y,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Hopf => "hopf",
            Mode::Canard(_) => "canard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdiSign {
    Neg,
    Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntryExitSequence {
    pub y0: f64,
    pub values: MonotoneSequence,
    /// |I| at each solved pair (y_k, y_{k+1})
    pub residuals: Vec<f64>,
    pub mode: Mode,
    pub sdi_sign: SdiSign,
    /// Stopped early at the gap floor.
    pub truncated: bool,
}

impl EntryExitSequence {
    /// Writes rows `k, y_k, gap_k, residual_k`; the last row has no gap.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let io = |e: csv::Error| Error::Domain(format!("csv output failed: {e}"));
        out.write_record(["k", "y_k", "gap_k", "residual_k"])
            .map_err(io)?;
        let ys = self.values.values();
        for (k, y) in ys.iter().enumerate() {
            let (gap, res) = match ys.get(k + 1) {
                Some(next) => (
                    format!("{:e}", (y - next).abs()),
                    format!("{:e}", self.residuals[k]),
                ),
                None => (String::new(), String::new()),
            };
            out.write_record([k.to_string(), format!("{y:.17e}"), gap, res])
                .map_err(io)?;
        }
        out.flush()
            .map_err(|e| Error::Domain(format!("csv output failed: {e}")))?;
        Ok(())
    }
}

/// Next term: solves I(y', y) = 0 (Neg) or I(y, y') = 0 (Pos) for y'
/// strictly between the limit and `y`. Returns `(y', |I|)`.
pub fn entry_exit_next(ctx: &SdiContext, y: f64, mode: Mode, sign: SdiSign) -> Result<(f64, f64)> {
    let limit = mode.limit(ctx);
    let span = y - limit;
    if span == 0.0 {
        return Err(Error::Domain("y coincides with the limit".into()));
    }
    let rel = |v: f64| v.abs().max(f64::MIN_POSITIVE);
    let eval = |z: f64| -> Result<f64> {
        Ok(match sign {
            SdiSign::Neg => ctx.sdi(z, y)?.value,
            SdiSign::Pos => ctx.sdi(y, z)?.value,
        })
    };
    let near = limit + span * 1e-12;
    let far = y - span * 1e-15;
    let (fa, fb) = (eval(near)?, eval(far)?);
    if !(fa * fb < 0.0) {
        return Err(Error::BracketFailure {
            y,
            tilde_i: ctx.tilde_i(y).unwrap_or(f64::NAN),
        });
    }
    let failure = std::cell::Cell::new(None::<Error>);
    let f = |z: f64| match eval(z) {
        Ok(v) => v,
        Err(e) => {
            failure.set(Some(e));
            f64::NAN
        }
    };
    let root = brent(f, near.min(far), near.max(far), rel(span) * 1e-15, 300);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let next = root?;
    let residual = eval(next)?.abs();
    if residual > RESIDUAL_LIMIT {
        return Err(Error::Accuracy {
            defect: residual,
            limit: RESIDUAL_LIMIT,
        });
    }
    Ok((next, residual))
}

/// Iterates [`entry_exit_next`] `n` times or until a step drops below
/// [`GAP_FLOOR`]. The side of the limit and the SDI sign are taken from the
/// Hopf point and from a sampled sign check of Ĩ between the limit and `y0`.
pub fn entry_exit_sequence(
    ctx: &SdiContext,
    y0: f64,
    n: usize,
    mode: Mode,
) -> Result<EntryExitSequence> {
    let limit = mode.limit(ctx);
    if !((y0 - limit) * ctx.hopf().fiber_side() > 0.0) {
        return Err(Error::Domain(format!(
            "y0 = {y0} is not on the {} side of the limit {limit}",
            if ctx.hopf().fiber_side() > 0.0 {
                "upper"
            } else {
                "lower"
            }
        )));
    }
    let sdi_sign = match ctx.check_assumption2(limit, y0, ASSUMPTION_SAMPLES)? {
        Assumption2::ConstantNeg => SdiSign::Neg,
        Assumption2::ConstantPos => SdiSign::Pos,
        Assumption2::Violated(y) => return Err(Error::Assumption2Violated { y }),
    };
    let mut values = vec![y0];
    let mut residuals = Vec::new();
    let mut truncated = false;
    let mut y = y0;
    for _ in 0..n {
        let (next, res) = entry_exit_next(ctx, y, mode, sdi_sign)?;
        if (y - next).abs() < GAP_FLOOR {
            truncated = true;
            break;
        }
        values.push(next);
        residuals.push(res);
        y = next;
    }
    if truncated && values.len() < MIN_ESTIMATION_LEN {
        return Err(Error::TruncatedSequence {
            count: values.len(),
        });
    }
    Ok(EntryExitSequence {
        y0,
        values: MonotoneSequence::new(values, limit)?,
        residuals,
        mode,
        sdi_sign,
        truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{PlanarSystem, SystemKind};
    use crate::slowfast::find_slow_fast_hopf;

    fn ctx(f: &str, g: &str) -> SdiContext {
        let sys = PlanarSystem::from_strings(f, g, SystemKind::SlowFast).unwrap();
        let h = find_slow_fast_hopf(&sys, (0.1, 0.1)).unwrap();
        SdiContext::new(&sys, &h).unwrap()
    }

    #[test]
    fn first_hopf_step_matches_closed_form() {
        let c = ctx("y - x^2", "-x + 0.3*x^2");
        let (y1, res) = entry_exit_next(&c, 1.0, Mode::Hopf, SdiSign::Neg).unwrap();
        assert!((y1 - 0.69367209086854647109).abs() < 1e-8, "{y1}");
        assert!(res <= RESIDUAL_LIMIT);
    }

    #[test]
    fn hopf_sequence_decreases_to_the_contact_level() {
        let c = ctx("y - x^2", "-x + 0.3*x^2");
        let s = entry_exit_sequence(&c, 1.0, 40, Mode::Hopf).unwrap();
        assert_eq!(s.values.len(), 41);
        assert_eq!(s.sdi_sign, SdiSign::Neg);
        assert!(s.values.values().windows(2).all(|w| w[1] < w[0]));
        assert!(s.residuals.iter().all(|&r| r <= RESIDUAL_LIMIT));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,y_k,gap_k,residual_k"));
        assert_eq!(text.lines().count(), 42);
    }

    #[test]
    fn zero_length_and_bad_inputs() {
        let c = ctx("y - x^2", "-x + 0.3*x^2");
        let s = entry_exit_sequence(&c, 0.5, 0, Mode::Hopf).unwrap();
        assert_eq!(s.values.values(), &[0.5]);
        assert!(matches!(
            entry_exit_sequence(&c, -0.5, 10, Mode::Hopf),
            Err(Error::Domain(_))
        ));
        let sym = ctx("y - x^2", "-x");
        assert!(matches!(
            entry_exit_sequence(&sym, 0.5, 10, Mode::Hopf),
            Err(Error::Assumption2Violated { .. })
        ));
    }

    #[test]
    fn canard_sequence_approaches_the_balanced_level() {
        let c = ctx("y - x^2", "-x - x^2 + 20*x^4");
        let ys = c.balanced_canard_level((0.01, 0.15), 64).unwrap();
        let s = entry_exit_sequence(&c, ys + 0.05, 40, Mode::Canard(ys)).unwrap();
        assert!(s.values.len() >= MIN_ESTIMATION_LEN);
        assert!(s
            .values
            .values()
            .windows(2)
            .all(|w| w[1] < w[0] && w[1] > ys));
    }
}
