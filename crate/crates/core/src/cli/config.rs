//! Experiment manifests: a TOML file plus dotted `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fracdim::{lattice::MAX_GATE, DEFAULT_GATE, MIN_SCALES};
use crate::zoo::{ModelParams, SpiralSettings};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    /// Zoo entry for `spiral-dim`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default)]
    pub params: ModelParams,
    #[serde(default)]
    pub spiral: SpiralSettings,
    #[serde(default)]
    pub estimate: EstimateSettings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entry_exit: Option<EntryExitSettings>,
    #[serde(default)]
    pub table1: Table1Settings,
    #[serde(default)]
    pub output: OutputSettings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateSettings {
    /// Any of `box`, `sausage`, `sector`.
    pub methods: Vec<String>,
    pub scales: usize,
    pub gate: f64,
    /// Sequence estimator override for entry-exit runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<String>,
}

impl Default for EstimateSettings {
    fn default() -> Self {
        Self {
            methods: vec!["box".into(), "sausage".into()],
            scales: 24,
            gate: DEFAULT_GATE,
            sequence: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Hopf,
    Canard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryExitSettings {
    pub f: String,
    pub g: String,
    #[serde(default = "default_mode")]
    pub mode: ModeName,
    /// Start level; in canard mode defaults to y* + `offset`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y0: Option<f64>,
    #[serde(default = "default_len")]
    pub n: usize,
    #[serde(default = "default_guess")]
    pub guess: [f64; 2],
    /// Search window for the balanced level.
    #[serde(default = "default_window")]
    pub window: [f64; 2],
    #[serde(default = "default_offset")]
    pub offset: f64,
}

fn default_mode() -> ModeName {
    ModeName::Hopf
}
fn default_len() -> usize {
    crate::slowfast::DEFAULT_LEN
}
fn default_guess() -> [f64; 2] {
    [0.1, 0.1]
}
fn default_window() -> [f64; 2] {
    [0.01, 0.15]
}
fn default_offset() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Settings {
    /// `(m, n, k)` rows; all eight when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<[u32; 3]>>,
    pub r0: f64,
}

impl Default for Table1Settings {
    fn default() -> Self {
        Self {
            rows: None,
            r0: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence_csv: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<PathBuf>,
    /// Also write a matplotlib script next to the trajectory dump.
    pub plot_script: bool,
    /// Fill the runtime column. Off by default so reruns are byte-identical.
    pub runtime: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            csv: None,
            sequence_csv: None,
            trajectory: None,
            plot_script: false,
            runtime: false,
        }
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

/// Sets `key = value` at a dotted path; `value` is read as a TOML value
/// and falls back to a bare string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| domain(format!("override `{assignment}` is not key=value")))?;
    let value = match toml::from_str::<toml::Table>(&format!("v = {}", raw.trim())) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(domain(format!("bad override key `{key}`")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let slot = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = slot
            .as_table_mut()
            .ok_or_else(|| domain(format!("override `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl ExperimentConfig {
    /// Parses `text`, applies `overrides`, then validates.
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| domain(format!("config is not valid TOML: {e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e| domain(format!("config does not match the schema: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| domain(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, overrides)
    }

    /// Canonical TOML rendering, the input of every row digest.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(domain("`id` must not be empty"));
        }
        let s = &self.spiral;
        if !(10..=100_000).contains(&s.turns) {
            return Err(domain(format!(
                "spiral.turns = {} outside [10, 100000]",
                s.turns
            )));
        }
        if !(16..=8192).contains(&s.samples_per_turn) {
            return Err(domain(format!(
                "spiral.samples_per_turn = {} outside [16, 8192]",
                s.samples_per_turn
            )));
        }
        if !(s.r_min > 0.0 && s.r_min <= 0.1) {
            return Err(domain(format!(
                "spiral.r_min = {} outside (0, 0.1]",
                s.r_min
            )));
        }
        if !(1e-13..=1e-6).contains(&s.tol) {
            return Err(domain(format!(
                "spiral.tol = {} outside [1e-13, 1e-6]",
                s.tol
            )));
        }
        let e = &self.estimate;
        if !(MIN_SCALES..=64).contains(&e.scales) {
            return Err(domain(format!(
                "estimate.scales = {} outside [{MIN_SCALES}, 64]",
                e.scales
            )));
        }
        if !(e.gate > 0.0 && e.gate <= MAX_GATE) {
            return Err(domain(format!(
                "estimate.gate = {} outside (0, {MAX_GATE}]",
                e.gate
            )));
        }
        if e.methods.is_empty() {
            return Err(domain("estimate.methods is empty"));
        }
        for m in &e.methods {
            if !["box", "sausage", "sector"].contains(&m.as_str()) {
                return Err(domain(format!(
                    "unknown estimate method `{m}` (box, sausage, sector)"
                )));
            }
        }
        if let Some(ee) = &self.entry_exit {
            if ee.n > 10_000 {
                return Err(domain(format!("entry_exit.n = {} above 10000", ee.n)));
            }
            if !(ee.window[0] < ee.window[1]) {
                return Err(domain("entry_exit.window must be increasing"));
            }
            if !(ee.offset > 0.0) {
                return Err(domain("entry_exit.offset must be positive"));
            }
        }
        let t = &self.table1;
        if !(t.r0 > 0.0 && t.r0 < 1.0) {
            return Err(domain(format!("table1.r0 = {} outside (0, 1)", t.r0)));
        }
        for [m, n, k] in t.rows.iter().flatten() {
            if m % 2 == 0 || n % 2 == 0 || *k == 0 {
                return Err(domain(format!(
                    "table1 row ({m}, {n}, {k}) needs odd m, n and k ≥ 1"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::from_toml("id = \"x\"", &[]).unwrap();
        assert_eq!(c.estimate.scales, 24);
        assert_eq!(c.spiral.turns, 200);
        assert!(c.entry_exit.is_none());
    }

    #[test]
    fn overrides_reach_nested_tables() {
        let c = ExperimentConfig::from_toml(
            "id = \"x\"\nmodel = \"power-spiral\"",
            &[
                "params.alpha=0.5".into(),
                "estimate.methods=[\"sector\"]".into(),
                "spiral.turns = 300".into(),
                "model=degfocus".into(),
            ],
        )
        .unwrap();
        assert_eq!(c.params.alpha, Some(0.5));
        assert_eq!(c.estimate.methods, vec!["sector"]);
        assert_eq!(c.spiral.turns, 300);
        assert_eq!(c.model.as_deref(), Some("degfocus"));
    }

    #[test]
    fn schema_and_ranges_are_enforced() {
        for (text, o) in [
            ("id = \"x\"\nbogus = 1", vec![]),
            ("id = \"x\"", vec!["estimate.gate=0.5".to_string()]),
            ("id = \"x\"", vec!["spiral.turns=3".to_string()]),
            (
                "id = \"x\"",
                vec!["estimate.methods=[\"magic\"]".to_string()],
            ),
            ("id = \"x\"", vec!["table1.rows=[[4,3,2]]".to_string()]),
            ("id = \"\"", vec![]),
            ("id = ", vec![]),
            ("id = \"x\"", vec!["noequals".to_string()]),
        ] {
            let r = ExperimentConfig::from_toml(text, &o);
            assert!(matches!(r, Err(Error::Domain(_))), "{text} {o:?}: {r:?}");
        }
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = ExperimentConfig::from_toml(
            "id = \"x\"\n[entry_exit]\nf = \"y - x^2\"\ng = \"-x\"\nmode = \"canard\"",
            &[],
        )
        .unwrap();
        let back = ExperimentConfig::from_toml(&c.canonical(), &[]).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.canonical(), c.canonical());
    }
}
