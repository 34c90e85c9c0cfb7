//! Named spiral sources: each builds a trajectory (and, where the radial
//! law is known in closed form, a sector model) plus the predicted dimension.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{spiral_sample, IntegrateOptions, Trajectory};
use crate::fracdim::{PowerLawSpiral, Registry};
use crate::models::{
    closed_spiral, gen_trig, hopf_takens, Approach, ClosedSpiralKind, DegFocusParams,
    HopfTakensParams, PlanarSystem, Polynomial2,
};
use crate::regular::{
    predict_3d_spiral_dim, predict_degfocus_dim, predict_exp_spiral_dim, predict_hopf_takens_dim,
    predict_power_spiral_dim, DimPrediction,
};

/// Union of the parameters any zoo entry may read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub a1: Option<f64>,
    pub b2: Option<f64>,
    pub a: Option<Vec<f64>>,
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub k: Option<u32>,
    pub sign: Option<i8>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub center: Option<[f64; 2]>,
    pub approach: Option<Approach>,
    /// Starting radius for integrated or reduced-equation spirals.
    pub r0: Option<f64>,
}

fn need<T: Clone>(v: &Option<T>, model: &str, field: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Domain(format!("model `{model}` needs parameter `{field}`")))
}

impl ModelParams {
    fn hopf_takens(&self) -> Result<HopfTakensParams> {
        HopfTakensParams::new(need(&self.a, "hopf-takens", "a")?)
    }

    fn degfocus(&self) -> Result<DegFocusParams> {
        let name = "degfocus";
        DegFocusParams::new(
            need(&self.m, name, "m")?,
            need(&self.n, name, "n")?,
            need(&self.k, name, "k")?,
            self.sign.unwrap_or(-1),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralSettings {
    pub turns: usize,
    pub samples_per_turn: usize,
    pub r_min: f64,
    pub tol: f64,
}

impl Default for SpiralSettings {
    fn default() -> Self {
        Self {
            turns: 200,
            samples_per_turn: 512,
            r_min: 1e-6,
            tol: 1e-10,
        }
    }
}

impl SpiralSettings {
    fn integrate_options(&self) -> IntegrateOptions {
        IntegrateOptions {
            tol: self.tol,
            ..IntegrateOptions::default()
        }
    }
}

pub trait SpiralSource: Send + Sync {
    fn name(&self) -> &'static str;
    /// Closed-form dimension, if the model has one.
    fn predict(&self, p: &ModelParams) -> Result<Option<DimPrediction>>;
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory>;
    /// Radial law for the sector-area estimator.
    fn sector_spiral(&self, _p: &ModelParams) -> Result<Option<PowerLawSpiral>> {
        Ok(None)
    }
}

struct PowerSource;
struct ExpSource;
struct ThreeDSource;
struct HopfTakensSource;
struct DegFocusSource;
struct UserSource;

fn closed(kind: ClosedSpiralKind, s: &SpiralSettings) -> Result<Trajectory> {
    let lo = kind.min_parameter().max(0.0);
    closed_spiral(kind, (lo, lo + TAU * s.turns as f64), s.samples_per_turn)
}

impl SpiralSource for PowerSource {
    fn name(&self) -> &'static str {
        "power-spiral"
    }
    fn predict(&self, p: &ModelParams) -> Result<Option<DimPrediction>> {
        predict_power_spiral_dim(need(&p.alpha, self.name(), "alpha")?).map(Some)
    }
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory> {
        let alpha = need(&p.alpha, self.name(), "alpha")?;
        closed(ClosedSpiralKind::PowerSpiral { alpha }, s)
    }
    fn sector_spiral(&self, p: &ModelParams) -> Result<Option<PowerLawSpiral>> {
        PowerLawSpiral::power(need(&p.alpha, self.name(), "alpha")?).map(Some)
    }
}

impl SpiralSource for ExpSource {
    fn name(&self) -> &'static str {
        "exp-spiral"
    }
    fn predict(&self, p: &ModelParams) -> Result<Option<DimPrediction>> {
        need(&p.beta, self.name(), "beta")?;
        Ok(Some(predict_exp_spiral_dim()))
    }
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory> {
        let beta = need(&p.beta, self.name(), "beta")?;
        closed(ClosedSpiralKind::ExpSpiral { beta }, s)
    }
}

impl SpiralSource for ThreeDSource {
    fn name(&self) -> &'static str {
        "three-d"
    }
    fn predict(&self, p: &ModelParams) -> Result<Option<DimPrediction>> {
        predict_3d_spiral_dim(
            need(&p.a1, self.name(), "a1")?,
            need(&p.b2, self.name(), "b2")?,
        )
        .map(Some)
    }
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory> {
        let a1 = need(&p.a1, self.name(), "a1")?;
        let b2 = need(&p.b2, self.name(), "b2")?;
        closed(ClosedSpiralKind::ThreeD { a1, b2 }, s)
    }
}

impl SpiralSource for HopfTakensSource {
    fn name(&self) -> &'static str {
        "hopf-takens"
    }
    fn predict(&self, p: &ModelParams) -> Result<Option<DimPrediction>> {
        Ok(Some(predict_hopf_takens_dim(&p.hopf_takens()?)))
    }
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory> {
        let ht = p.hopf_takens()?;
        let r0 = p.r0.unwrap_or(0.5);
        // r grows where P(r²) > 0, so follow the flow backward there
        let auto = if ht.radial_poly(r0 * r0) > 0.0 {
            Approach::Backward
        } else {
            Approach::Forward
        };
        let sys = hopf_takens(&ht).with_approach(p.approach.unwrap_or(auto));
        spiral_sample(&sys, [r0, 0.0], s.r_min, s.turns, s.integrate_options())
    }
    fn sector_spiral(&self, p: &ModelParams) -> Result<Option<PowerLawSpiral>> {
        let ht = p.hopf_takens()?;
        // only the pure weak focus, all a_i = 0, has this radial law
        if ht.a.iter().any(|&c| c != 0.0) {
            return Ok(None);
        }
        PowerLawSpiral::weak_focus(ht.l as u32, p.r0.unwrap_or(0.5)).map(Some)
    }
}

impl SpiralSource for DegFocusSource {
    fn name(&self) -> &'static str {
        "degfocus"
    }
    fn predict(&self, p: &ModelParams) -> Result<Option<DimPrediction>> {
        Ok(Some(predict_degfocus_dim(&p.degfocus()?)))
    }
    /// Closed-form solution of the reduced radial equation in (n, m)-polar
    /// coordinates, r^{−p} = r0^{−p} + p·H(φ).
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory> {
        let d = p.degfocus()?;
        if d.k == 0 || d.sign > 0 {
            return Err(Error::Domain(
                "closed-form focus trajectory needs k ≥ 1 and sign −1".into(),
            ));
        }
        let table = gen_trig(d.m, d.n, 4000)?;
        let pe = d.p() as f64;
        let r0 = p.r0.unwrap_or(0.9);
        let count = s.turns * s.samples_per_turn;
        let points = (0..=count)
            .map(|i| {
                let phi = table.period * i as f64 / s.samples_per_turn as f64;
                let r = (r0.powf(-pe) + pe * table.h(phi)).powf(-1.0 / pe);
                let (c, sn) = table.cs_sn(phi);
                [phi, r.powi(d.n as i32) * c, r.powi(d.m as i32) * sn]
            })
            .collect();
        Ok(Trajectory::from_points(points, [0.0, 0.0]).converging(true))
    }
    fn sector_spiral(&self, p: &ModelParams) -> Result<Option<PowerLawSpiral>> {
        let d = p.degfocus()?;
        if d.k == 0 || d.sign > 0 {
            return Ok(None);
        }
        let table = Arc::new(gen_trig(d.m, d.n, 4000)?);
        PowerLawSpiral::degenerate_focus(&d, table, p.r0.unwrap_or(0.9)).map(Some)
    }
}

impl UserSource {
    fn system(p: &ModelParams) -> Result<PlanarSystem> {
        let f = Polynomial2::parse(&need(&p.f, "user", "f")?)?;
        let g = Polynomial2::parse(&need(&p.g, "user", "g")?)?;
        let mut sys =
            PlanarSystem::regular(f, g).with_approach(p.approach.unwrap_or(Approach::Forward));
        sys.center = p.center.unwrap_or([0.0, 0.0]);
        Ok(sys)
    }
}

impl SpiralSource for UserSource {
    fn name(&self) -> &'static str {
        "user"
    }
    fn predict(&self, _p: &ModelParams) -> Result<Option<DimPrediction>> {
        Ok(None)
    }
    fn trajectory(&self, p: &ModelParams, s: &SpiralSettings) -> Result<Trajectory> {
        let sys = Self::system(p)?;
        let r0 = p.r0.unwrap_or(0.5);
        let init = [sys.center[0] + r0, sys.center[1]];
        spiral_sample(&sys, init, s.r_min, s.turns, s.integrate_options())
    }
}

pub fn zoo() -> Registry<dyn SpiralSource> {
    let list: Vec<Box<dyn SpiralSource>> = vec![
        Box::new(PowerSource),
        Box::new(ExpSource),
        Box::new(ThreeDSource),
        Box::new(HopfTakensSource),
        Box::new(DegFocusSource),
        Box::new(UserSource),
    ];
    Registry::from_entries(list.into_iter().map(|s| (s.name(), s)))
}

/// Certainty label for rows without a closed-form prediction.
pub fn certainty_label(p: Option<&DimPrediction>) -> String {
    p.map_or_else(|| "none".to_string(), |d| d.certainty.to_string())
}
