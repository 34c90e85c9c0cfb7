//! Closed-form evaluations exposed by the `formulas` subcommand.

use crate::error::{Error, Result};
use crate::fracdim::{snap_value, Lattice, Rational, DEFAULT_GATE};
use crate::models::{DegFocusParams, HopfTakensParams};
use crate::regular::{
    polycycle_spiral_dim, predict_3d_spiral_dim, predict_degfocus_dim, predict_hopf_takens_dim,
    predict_limit_cycle_dim, predict_power_spiral_dim, saddle_loop_dim, to_f64,
    two_saddle_cyclicity_bound, two_saddle_cyclicity_bound_exact, two_saddle_rectifiable_bound,
};

/// A number given either as `p/q`, an integer, or a decimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Number {
    pub value: f64,
    pub exact: Option<Rational>,
}

impl std::str::FromStr for Number {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("`{s}` is not a number"));
        if let Some((a, b)) = s.split_once('/') {
            let a: i64 = a.trim().parse().map_err(|_| bad())?;
            let b: i64 = b.trim().parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            let r = Rational::new(a, b);
            return Ok(Self {
                value: to_f64(r),
                exact: Some(r),
            });
        }
        if let Ok(i) = s.parse::<i64>() {
            return Ok(Self {
                value: i as f64,
                exact: Some(Rational::from_integer(i)),
            });
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        if !value.is_finite() {
            return Err(bad());
        }
        // short decimals like 0.5 are taken literally
        let exact = s
            .split_once('.')
            .filter(|(_, frac)| frac.len() <= 9 && frac.chars().all(|c| c.is_ascii_digit()))
            .and_then(|(_, frac)| {
                let den = 10i64.pow(frac.len() as u32);
                let num = (value * den as f64).round();
                ((num / den as f64) == value).then(|| Rational::new(num as i64, den))
            });
        Ok(Self { value, exact })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    HopfTakens { a: Vec<f64> },
    LimitCycle { m: u32 },
    DegFocus { m: u32, n: u32, k: u32 },
    ThreeD { a1: f64, b2: f64 },
    PowerSpiral { alpha: f64 },
    SaddleLoop { codim: u32 },
    Polycycle { dims: Vec<f64> },
    TwoSaddle { d1: Number, d2: Number },
    TwoSaddleRectifiable,
    Classify { lattice: Lattice, d: Number },
}

fn show(r: Rational) -> String {
    format!("{r} ({:.6})", to_f64(r))
}

impl Formula {
    pub fn evaluate(&self) -> Result<String> {
        Ok(match self {
            Formula::HopfTakens { a } => {
                predict_hopf_takens_dim(&HopfTakensParams::new(a.clone())?).to_string()
            }
            Formula::LimitCycle { m } => predict_limit_cycle_dim(*m)?.to_string(),
            Formula::DegFocus { m, n, k } => {
                predict_degfocus_dim(&DegFocusParams::new(*m, *n, *k, -1)?).to_string()
            }
            Formula::ThreeD { a1, b2 } => predict_3d_spiral_dim(*a1, *b2)?.to_string(),
            Formula::PowerSpiral { alpha } => predict_power_spiral_dim(*alpha)?.to_string(),
            Formula::SaddleLoop { codim } => show(saddle_loop_dim(*codim)?),
            Formula::Polycycle { dims } => format!("{:.6}", polycycle_spiral_dim(dims)?),
            Formula::TwoSaddle { d1, d2 } => match (d1.exact, d2.exact) {
                (Some(a), Some(b)) => two_saddle_cyclicity_bound_exact(a, b)?.to_string(),
                _ => two_saddle_cyclicity_bound(d1.value, d2.value)?.to_string(),
            },
            Formula::TwoSaddleRectifiable => two_saddle_rectifiable_bound().to_string(),
            Formula::Classify { lattice, d } => {
                let bound = match d
                    .exact
                    .filter(|r| *r == Rational::from_integer(1) || lattice.index_of(*r).is_some())
                {
                    Some(r) => {
                        let b = lattice.bound(r)?;
                        format!("{b} (d = {r}, exact)")
                    }
                    None => {
                        let c = snap_value(d.value, *lattice, DEFAULT_GATE)?;
                        format!(
                            "{} (snapped to {}, residual {:.4})",
                            c.cyclicity_bound, c.snapped, c.residual
                        )
                    }
                };
                format!("bound {bound}")
            }
        })
    }
}
