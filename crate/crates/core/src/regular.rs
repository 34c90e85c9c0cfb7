//! Closed-form dimensions and cyclicity formulas for regular planar systems.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{DegFocusParams, HopfTakensParams};

pub use crate::fracdim::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certainty {
    Theorem,
    Conjecture,
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Certainty::Theorem => "theorem",
            Certainty::Conjecture => "conjecture",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Regime {
    /// Comparable with an exponential spiral; dimension 1.
    Exponential,
    /// Comparable with r = φ^{−α}.
    Power { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimPrediction {
    pub exact: Option<Rational>,
    value: f64,
    pub regime: Regime,
    pub certainty: Certainty,
}

impl DimPrediction {
    fn rational(r: Rational, regime: Regime, certainty: Certainty) -> Self {
        Self {
            exact: Some(r),
            value: to_f64(r),
            regime,
            certainty,
        }
    }

    fn real(v: f64, regime: Regime, certainty: Certainty) -> Self {
        Self {
            exact: None,
            value: v,
            regime,
            certainty,
        }
    }

    pub fn value(&self) -> f64 {
        self.exact.map_or(self.value, to_f64)
    }
}

impl fmt::Display for DimPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{r} ({:.5}, {})", to_f64(r), self.certainty),
            None => write!(f, "{:.5} ({})", self.value, self.certainty),
        }
    }
}

pub fn to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

/// Spiral of the Hopf–Takens focus: 1 if a₀ ≠ 0, otherwise 4k/(2k+1) with k
/// the index of the first nonzero coefficient.
pub fn predict_hopf_takens_dim(p: &HopfTakensParams) -> DimPrediction {
    if p.a[0] != 0.0 {
        return DimPrediction::rational(q(1, 1), Regime::Exponential, Certainty::Theorem);
    }
    let k = p.first_nonzero().0 as i64;
    DimPrediction::rational(
        q(4 * k, 2 * k + 1),
        Regime::Power {
            alpha: 1.0 / (2 * k) as f64,
        },
        Certainty::Theorem,
    )
}

/// Inverse of k ↦ 4k/(2k+1) on its value set.
pub fn hopf_takens_order_from_dim(d: Rational) -> Option<u32> {
    let two = Rational::from_integer(2);
    if d <= Rational::from_integer(1) || d >= two {
        return None;
    }
    let k = d / ((two - d) * 2);
    (k.is_integer() && *k.numer() > 0).then(|| *k.numer() as u32)
}

/// Spiral accumulating at a limit cycle of multiplicity m: 2 − 1/m.
pub fn predict_limit_cycle_dim(m: u32) -> Result<DimPrediction> {
    if m == 0 {
        return Err(Error::Domain("multiplicity must be at least 1".into()));
    }
    let regime = if m == 1 {
        Regime::Exponential
    } else {
        Regime::Power {
            alpha: 1.0 / (m - 1) as f64,
        }
    };
    Ok(DimPrediction::rational(
        Rational::from_integer(2) - q(1, m as i64),
        regime,
        Certainty::Theorem,
    ))
}

/// Degenerate focus: 1 for k = 0; 2 − 2/(1+2kn) for m = n; the conjectured
/// 2 − (1 + n/m)/(1 + 2kn) otherwise.
pub fn predict_degfocus_dim(p: &DegFocusParams) -> DimPrediction {
    let (m, n, k) = (p.m as i64, p.n as i64, p.k as i64);
    if k == 0 {
        return DimPrediction::rational(q(1, 1), Regime::Exponential, Certainty::Theorem);
    }
    let regime = Regime::Power {
        alpha: 1.0 / (2 * k * n) as f64,
    };
    let two = Rational::from_integer(2);
    let denom = Rational::from_integer(1 + 2 * k * n);
    if m == n {
        DimPrediction::rational(two - two / denom, regime, Certainty::Theorem)
    } else {
        let num = Rational::from_integer(1) + q(n, m);
        DimPrediction::rational(two - num / denom, regime, Certainty::Conjecture)
    }
}

/// r = φ^{−α}: 2/(1+α), exact when α is a ratio of small integers.
pub fn predict_power_spiral_dim(alpha: f64) -> Result<DimPrediction> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1]")));
    }
    let regime = Regime::Power { alpha };
    Ok(match small_ratio(alpha) {
        Some(r) => DimPrediction::rational(
            Rational::from_integer(2) / (Rational::from_integer(1) + r),
            regime,
            Certainty::Theorem,
        ),
        None => DimPrediction::real(2.0 / (1.0 + alpha), regime, Certainty::Theorem),
    })
}

/// Exponential spirals are rectifiable.
pub fn predict_exp_spiral_dim() -> DimPrediction {
    DimPrediction::rational(q(1, 1), Regime::Exponential, Certainty::Theorem)
}

fn small_ratio(v: f64) -> Option<Rational> {
    (1..=1000i64).find_map(|den| {
        let num = (v * den as f64).round();
        ((num / den as f64 - v).abs() <= 1e-14 * v.abs().max(1.0)).then(|| q(num as i64, den))
    })
}

/// Planar projection of the three-dimensional example spiral.
pub fn predict_3d_spiral_dim(a1: f64, b2: f64) -> Result<DimPrediction> {
    if b2 == 0.0 || !b2.is_finite() || !a1.is_finite() {
        return Err(Error::Domain("need finite a1 and b2 ≠ 0".into()));
    }
    let ratio = a1 / b2;
    if ratio <= 0.0 {
        return Err(Error::NotAccumulating { ratio });
    }
    if ratio > 1.0 {
        return Ok(DimPrediction::rational(
            q(1, 1),
            Regime::Exponential,
            Certainty::Theorem,
        ));
    }
    let regime = Regime::Power { alpha: ratio };
    let integral = a1.fract() == 0.0 && b2.fract() == 0.0 && a1.abs() < 1e15 && b2.abs() < 1e15;
    let exact = if integral {
        Some(q(a1 as i64, b2 as i64))
    } else {
        small_ratio(ratio)
    };
    Ok(match exact {
        Some(r) => DimPrediction::rational(
            Rational::from_integer(2) / (Rational::from_integer(1) + r),
            regime,
            Certainty::Theorem,
        ),
        None => DimPrediction::real(2.0 / (1.0 + ratio), regime, Certainty::Theorem),
    })
}

/// Spiral accumulating at a polycycle: 1 + max of the transversal
/// sequence dimensions.
pub fn polycycle_spiral_dim(seq_dims: &[f64]) -> Result<f64> {
    if seq_dims.is_empty() {
        return Err(Error::Domain("need at least one sequence dimension".into()));
    }
    if let Some(d) = seq_dims.iter().find(|d| !(0.0..1.0).contains(*d)) {
        return Err(Error::Domain(format!(
            "sequence dimension {d} outside [0, 1)"
        )));
    }
    Ok(1.0 + seq_dims.iter().copied().fold(0.0, f64::max))
}

/// Spiral dimension at a saddle loop of codimension k.
pub fn saddle_loop_dim(codim: u32) -> Result<Rational> {
    if codim == 0 {
        return Err(Error::Domain("codimension must be at least 1".into()));
    }
    let k = codim as i64;
    let two = Rational::from_integer(2);
    Ok(if k % 2 == 0 {
        two - q(2, k)
    } else {
        two - q(2, k + 1)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolycycleData {
    pub d1: f64,
    pub d2: f64,
    spiral_dim: f64,
}

impl PolycycleData {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        let spiral_dim = polycycle_spiral_dim(&[d1, d2])?;
        Ok(Self { d1, d2, spiral_dim })
    }

    pub fn spiral_dim(&self) -> f64 {
        self.spiral_dim
    }
}

/// Cyclicity bound at a rectifiable two-saddle cycle (spiral dimension 1).
pub const fn two_saddle_rectifiable_bound() -> u32 {
    3
}

/// ⌊3 + (1+r)(d−1)/(2−d)⌋ with d = 1 + max(d1, d2) and
/// r = min{d2(1−d1)/(d1(1−d2)), d1(1−d2)/(d2(1−d1))}.
pub fn two_saddle_cyclicity_bound(d1: f64, d2: f64) -> Result<u32> {
    for d in [d1, d2] {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::Domain(format!(
                "sequence dimension {d} outside (0, 1); use the rectifiable bound for d = 1"
            )));
        }
    }
    let d = 1.0 + d1.max(d2);
    let a = d2 * (1.0 - d1) / (d1 * (1.0 - d2));
    let r = a.min(1.0 / a);
    let v = 3.0 + (1.0 + r) * (d - 1.0) / (2.0 - d);
    // absorb rounding at exact integers
    Ok((v + 1e-9 * v).floor() as u32)
}

/// Exact-rational variant of [`two_saddle_cyclicity_bound`].
pub fn two_saddle_cyclicity_bound_exact(d1: Rational, d2: Rational) -> Result<u32> {
    let (zero, one) = (Rational::from_integer(0), Rational::from_integer(1));
    for d in [d1, d2] {
        if d <= zero || d >= one {
            return Err(Error::Domain(format!(
                "sequence dimension {d} outside (0, 1)"
            )));
        }
    }
    let d = one + d1.max(d2);
    let a = d2 * (one - d1) / (d1 * (one - d2));
    let r = a.min(one / a);
    let v = Rational::from_integer(3) + (one + r) * (d - one) / (Rational::from_integer(2) - d);
    Ok(v.floor().to_integer() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ht(a: &[f64]) -> HopfTakensParams {
        HopfTakensParams::new(a.to_vec()).unwrap()
    }

    fn df(m: u32, n: u32, k: u32) -> DegFocusParams {
        DegFocusParams::new(m, n, k, -1).unwrap()
    }

    #[test]
    fn hopf_takens_predictions() {
        assert_eq!(predict_hopf_takens_dim(&ht(&[0.3])).exact, Some(q(1, 1)));
        assert_eq!(predict_hopf_takens_dim(&ht(&[0.0])).exact, Some(q(4, 3)));
        assert_eq!(
            predict_hopf_takens_dim(&ht(&[0.0, 0.0, 0.0])).exact,
            Some(q(12, 7))
        );
        assert_eq!(
            predict_hopf_takens_dim(&ht(&[0.0, -2.0, 0.0])).exact,
            Some(q(4, 3))
        );
        for k in 1..=10i64 {
            assert_eq!(
                hopf_takens_order_from_dim(q(4 * k, 2 * k + 1)),
                Some(k as u32)
            );
        }
        assert_eq!(hopf_takens_order_from_dim(q(3, 2)), None);
    }

    #[test]
    fn limit_cycle_predictions() {
        assert_eq!(predict_limit_cycle_dim(1).unwrap().exact, Some(q(1, 1)));
        assert_eq!(predict_limit_cycle_dim(2).unwrap().exact, Some(q(3, 2)));
        assert_eq!(predict_limit_cycle_dim(4).unwrap().exact, Some(q(7, 4)));
        assert!(predict_limit_cycle_dim(0).is_err());
    }

    #[test]
    fn degenerate_focus_predictions() {
        let p = predict_degfocus_dim(&df(3, 3, 1));
        assert_eq!((p.exact, p.certainty), (Some(q(12, 7)), Certainty::Theorem));
        let p = predict_degfocus_dim(&df(5, 3, 2));
        assert_eq!(
            (p.exact, p.certainty),
            (Some(q(122, 65)), Certainty::Conjecture)
        );
        assert!((p.value() - 1.87692).abs() < 5e-6);
        let p = predict_degfocus_dim(&df(21, 11, 11));
        assert_eq!(p.exact, Some(q(10174, 5103)));
        assert_eq!(predict_degfocus_dim(&df(5, 3, 0)).exact, Some(q(1, 1)));
    }

    #[test]
    fn conjecture_reduces_to_theorem_on_the_diagonal() {
        for m in (1..=21i64).step_by(2) {
            for k in 1..=11i64 {
                let conj = Rational::from_integer(2)
                    - (Rational::from_integer(1) + q(m, m)) / Rational::from_integer(1 + 2 * k * m);
                let p = predict_degfocus_dim(&df(m as u32, m as u32, k as u32));
                assert_eq!(p.exact, Some(conj));
            }
        }
    }

    #[test]
    fn three_d_predictions() {
        assert_eq!(
            predict_3d_spiral_dim(1.0, 2.0).unwrap().exact,
            Some(q(4, 3))
        );
        assert_eq!(
            predict_3d_spiral_dim(3.0, 1.0).unwrap().exact,
            Some(q(1, 1))
        );
        assert!(matches!(
            predict_3d_spiral_dim(-1.0, 1.0),
            Err(Error::NotAccumulating { .. })
        ));
        assert_eq!(
            predict_3d_spiral_dim(0.5, 1.5).unwrap().exact,
            Some(q(3, 2))
        );
    }

    #[test]
    fn power_and_exp_spirals() {
        assert_eq!(predict_power_spiral_dim(0.5).unwrap().exact, Some(q(4, 3)));
        assert_eq!(
            predict_power_spiral_dim(1.0 / 3.0).unwrap().exact,
            Some(q(3, 2))
        );
        assert_eq!(predict_power_spiral_dim(1.0).unwrap().exact, Some(q(1, 1)));
        let odd = predict_power_spiral_dim(std::f64::consts::FRAC_1_PI).unwrap();
        assert_eq!(odd.exact, None);
        assert!((odd.value() - 2.0 / (1.0 + std::f64::consts::FRAC_1_PI)).abs() < 1e-15);
        assert!(predict_power_spiral_dim(0.0).is_err());
        assert_eq!(predict_exp_spiral_dim().exact, Some(q(1, 1)));
    }

    #[test]
    fn polycycle_formulas() {
        assert_eq!(polycycle_spiral_dim(&[0.5]).unwrap(), 1.5);
        assert_eq!(polycycle_spiral_dim(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(polycycle_spiral_dim(&[0.3, 0.7]).unwrap(), 1.7);
        assert_eq!(polycycle_spiral_dim(&[0.7, 0.3]).unwrap(), 1.7);
        assert!(polycycle_spiral_dim(&[1.0]).is_err());
        let pd = PolycycleData::new(0.25, 0.5).unwrap();
        assert!((pd.spiral_dim() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn saddle_loops() {
        assert_eq!(saddle_loop_dim(1).unwrap(), q(1, 1));
        assert_eq!(saddle_loop_dim(2).unwrap(), q(1, 1));
        assert_eq!(saddle_loop_dim(3).unwrap(), q(3, 2));
        for t in 1..50 {
            assert_eq!(
                saddle_loop_dim(2 * t - 1).unwrap(),
                saddle_loop_dim(2 * t).unwrap()
            );
        }
    }

    #[test]
    fn two_saddle_bounds() {
        assert_eq!(two_saddle_cyclicity_bound(0.5, 0.5).unwrap(), 5);
        assert_eq!(two_saddle_cyclicity_bound(1.0 / 3.0, 0.5).unwrap(), 4);
        assert_eq!(
            two_saddle_cyclicity_bound_exact(q(1, 2), q(1, 2)).unwrap(),
            5
        );
        assert_eq!(
            two_saddle_cyclicity_bound_exact(q(1, 3), q(1, 2)).unwrap(),
            4
        );
        assert_eq!(two_saddle_rectifiable_bound(), 3);
        assert!(two_saddle_cyclicity_bound(0.0, 0.5).is_err());
    }
}
