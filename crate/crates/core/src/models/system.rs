use serde::{Deserialize, Serialize};

use super::poly::Polynomial2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    Regular,
    SlowFast,
}

/// Time direction in which orbits spiral into the declared center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approach {
    Forward,
    Backward,
}

impl Approach {
    pub fn sign(self) -> f64 {
        match self {
            Approach::Forward => 1.0,
            Approach::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSystem {
    pub f: Polynomial2,
    pub g: Polynomial2,
    pub kind: SystemKind,
    pub center: [f64; 2],
    pub approach: Approach,
}

impl PlanarSystem {
    pub fn regular(f: Polynomial2, g: Polynomial2) -> Self {
        Self {
            f,
            g,
            kind: SystemKind::Regular,
            center: [0.0, 0.0],
            approach: Approach::Forward,
        }
    }

    pub fn slow_fast(f: Polynomial2, g: Polynomial2) -> Self {
        Self {
            kind: SystemKind::SlowFast,
            ..Self::regular(f, g)
        }
    }

    pub fn from_strings(f: &str, g: &str, kind: SystemKind) -> Result<Self> {
        let f = Polynomial2::parse(f)?;
        let g = Polynomial2::parse(g)?;
        Ok(match kind {
            SystemKind::Regular => Self::regular(f, g),
            SystemKind::SlowFast => Self::slow_fast(f, g),
        })
    }

    pub fn with_approach(mut self, approach: Approach) -> Self {
        self.approach = approach;
        self
    }

    /// Vector field at ε = 1 (regular) or the fast/slow pair (f, g).
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.f.eval(x, y), self.g.eval(x, y)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfTakensParams {
    pub l: usize,
    pub a: Vec<f64>,
}

impl HopfTakensParams {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Domain(
                "Hopf-Takens codimension must be at least 1".into(),
            ));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite Hopf-Takens coefficient".into()));
        }
        Ok(Self { l: a.len(), a })
    }

    /// P(s) = s^l + Σ a_i s^i.
    pub fn radial_poly(&self, s: f64) -> f64 {
        let mut acc = 1.0;
        for c in self.a.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    /// Index and value of the first nonzero coefficient (a_l = 1).
    pub fn first_nonzero(&self) -> (usize, f64) {
        self.a
            .iter()
            .enumerate()
            .find(|(_, c)| **c != 0.0)
            .map(|(i, c)| (i, *c))
            .unwrap_or((self.l, 1.0))
    }
}

pub fn hopf_takens(p: &HopfTakensParams) -> PlanarSystem {
    let s = Polynomial2::x().pow(2).add(&Polynomial2::y().pow(2));
    let mut pp = s.pow(p.l as u32);
    for (i, c) in p.a.iter().enumerate() {
        pp = pp.add(&s.pow(i as u32).scale(*c));
    }
    let f = Polynomial2::y().scale(-1.0).add(&Polynomial2::x().mul(&pp));
    let g = Polynomial2::x().add(&Polynomial2::y().mul(&pp));
    let approach = if p.first_nonzero().1 > 0.0 {
        Approach::Backward
    } else {
        Approach::Forward
    };
    PlanarSystem::regular(f, g).with_approach(approach)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegFocusParams {
    pub m: u32,
    pub n: u32,
    pub k: u32,
    pub sign: i8,
}

impl DegFocusParams {
    pub fn new(m: u32, n: u32, k: u32, sign: i8) -> Result<Self> {
        if m % 2 == 0 || n % 2 == 0 {
            return Err(Error::Domain(format!(
                "m = {m} and n = {n} must both be odd"
            )));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::Domain("sign must be +1 or -1".into()));
        }
        Ok(Self { m, n, k, sign })
    }

    /// Exponent p = 2mnk of the reduced radial equation.
    pub fn p(&self) -> u32 {
        2 * self.m * self.n * self.k
    }
}

pub fn degenerate_focus(p: &DegFocusParams) -> PlanarSystem {
    let (m, n, k) = (p.m, p.n, p.k);
    let s = p.sign as f64;
    let x = Polynomial2::x();
    let y = Polynomial2::y();
    let big_r = x.pow(2 * m).add(&y.pow(2 * n)).pow(k);
    let f = y
        .pow(2 * n - 1)
        .scale(-(n as f64))
        .add(&x.pow(m).mul(&y.pow(n - 1)).mul(&big_r).scale(s * n as f64));
    let g = x
        .pow(2 * m - 1)
        .scale(m as f64)
        .add(&x.pow(m - 1).mul(&y.pow(n)).mul(&big_r).scale(s * m as f64));
    let approach = if p.sign < 0 {
        Approach::Forward
    } else {
        Approach::Backward
    };
    PlanarSystem::regular(f, g).with_approach(approach)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ht_direct(a: &[f64], x: f64, y: f64) -> ([f64; 2], f64) {
        let s = x * x + y * y;
        let mut pp = s.powi(a.len() as i32);
        for (i, c) in a.iter().enumerate() {
            pp += c * s.powi(i as i32);
        }
        let scale = y.abs() + (x * pp).abs() + x.abs() + (y * pp).abs();
        ([-y + x * pp, x + y * pp], scale)
    }

    fn df_direct(p: &DegFocusParams, x: f64, y: f64) -> ([f64; 2], f64) {
        let (m, n, k) = (p.m as i32, p.n as i32, p.k as i32);
        let s = p.sign as f64;
        let r = (x.powi(2 * m) + y.powi(2 * n)).powi(k);
        let a1 = -(n as f64) * y.powi(2 * n - 1);
        let a2 = s * n as f64 * x.powi(m) * y.powi(n - 1) * r;
        let b1 = m as f64 * x.powi(2 * m - 1);
        let b2 = s * m as f64 * x.powi(m - 1) * y.powi(n) * r;
        (
            [a1 + a2, b1 + b2],
            a1.abs() + a2.abs() + b1.abs() + b2.abs(),
        )
    }

    #[test]
    fn hopf_takens_examples() {
        let sys = hopf_takens(&HopfTakensParams::new(vec![0.0]).unwrap());
        assert_eq!(sys.f, Polynomial2::parse("-y + x^3 + x*y^2").unwrap());
        assert_eq!(sys.g, Polynomial2::parse("x + x^2*y + y^3").unwrap());
        assert_eq!(sys.approach, Approach::Backward);

        let p = HopfTakensParams::new(vec![-1.0]).unwrap();
        let sys = hopf_takens(&p);
        // r = 1 is invariant: radial velocity x f + y g vanishes on the unit circle
        for i in 0..16 {
            let t = i as f64 * 0.4;
            let (x, y) = (t.cos(), t.sin());
            let [fx, fy] = sys.eval(x, y);
            assert!((x * fx + y * fy).abs() < 1e-14);
        }
        assert_eq!(sys.approach, Approach::Forward);

        let p = HopfTakensParams::new(vec![0.0, 0.0]).unwrap();
        assert_eq!(p.radial_poly(2.0), 4.0);
        let sys = hopf_takens(&p);
        let [fx, fy] = sys.eval(0.5, 0.0);
        assert!((fx - 0.5f64.powi(5)).abs() < 1e-15 && (fy - 0.5).abs() < 1e-15);
    }

    #[test]
    fn linear_focus() {
        let sys = degenerate_focus(&DegFocusParams::new(1, 1, 0, -1).unwrap());
        assert_eq!(sys.f, Polynomial2::parse("-y - x").unwrap());
        assert_eq!(sys.g, Polynomial2::parse("x - y").unwrap());
    }

    #[test]
    fn degree_of_expanded_field() {
        let sys = degenerate_focus(&DegFocusParams::new(5, 3, 2, -1).unwrap());
        // x^m y^(n-1) x^(2mk) and x^(m-1) y^n x^(2mk) both have degree m + n - 1 + 2mk
        assert_eq!(sys.f.degree(), 27);
        assert_eq!(sys.g.degree(), 27);
    }

    #[test]
    fn even_exponents_rejected() {
        assert!(DegFocusParams::new(2, 3, 1, -1).is_err());
        assert!(DegFocusParams::new(3, 3, 1, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]
        #[test]
        fn hopf_takens_matches_formula(a in prop::collection::vec(-2.0f64..2.0, 1..4),
                                       x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let sys = hopf_takens(&HopfTakensParams::new(a.clone()).unwrap());
            let (want, scale) = ht_direct(&a, x, y);
            let got = sys.eval(x, y);
            for i in 0..2 {
                prop_assert!((got[i] - want[i]).abs() <= 1e-12 * scale.max(1e-300));
            }
        }

        #[test]
        fn degenerate_focus_matches_formula(mi in 0u32..3, ni in 0u32..3, k in 0u32..3,
                                            neg in any::<bool>(),
                                            x in -1.2f64..1.2, y in -1.2f64..1.2) {
            let p = DegFocusParams::new(2 * mi + 1, 2 * ni + 1, k, if neg { -1 } else { 1 }).unwrap();
            let sys = degenerate_focus(&p);
            let (want, scale) = df_direct(&p, x, y);
            let got = sys.eval(x, y);
            for i in 0..2 {
                prop_assert!((got[i] - want[i]).abs() <= 1e-12 * scale.max(1e-300));
            }
        }
    }
}
