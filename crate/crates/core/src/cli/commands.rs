//! Subcommand bodies. Each returns rows; writing files is left to callers
//! except for the auxiliary dumps named in the config.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ModeName};
use super::row::{digest, ResultRow};
use crate::error::{Error, Result};
use crate::flow::Trajectory;
use crate::fracdim::{
    sector_dim, spiral_grid, CurveEstimator, DimensionEstimate, Registry, SausageOptions,
    SectorOptions, SequenceEstimator,
};
use crate::models::{gen_trig, DegFocusParams, PlanarSystem, SystemKind};
use crate::regular::{predict_degfocus_dim, DimPrediction};
use crate::slowfast::{
    classify_canard, classify_hopf, default_estimator, entry_exit_sequence, find_slow_fast_hopf,
    EntryExitSequence, HopfPoint, Mode, SdiContext,
};
use crate::zoo::{certainty_label, zoo};

/// `(m, n, k)` rows with their reference numerical dimensions.
pub const TABLE1: [(u32, u32, u32, f64); 8] = [
    (5, 3, 2, 1.87287),
    (11, 3, 2, 1.89615),
    (21, 3, 2, 1.90574),
    (21, 11, 2, 1.96561),
    (5, 3, 11, 1.97581),
    (11, 3, 11, 1.98063),
    (21, 3, 11, 1.98255),
    (21, 11, 11, 1.99355),
];

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Domain(format!("cannot write {}: {e}", path.display()))
}

fn base_row(
    cfg: &ExperimentConfig,
    experiment: String,
    key: &str,
    pred: Option<&DimPrediction>,
) -> ResultRow {
    ResultRow {
        digest: digest(&cfg.canonical(), &format!("{experiment}/{key}")),
        experiment,
        method: key.to_string(),
        predicted: pred.map(DimPrediction::value),
        predicted_exact: pred.and_then(|p| p.exact).map(|r| r.to_string()),
        certainty: certainty_label(pred),
        ..ResultRow::default()
    }
}

fn fill(row: &mut ResultRow, est: &DimensionEstimate) {
    row.estimated = Some(est.value);
    row.stderr = Some(est.stderr);
}

fn elapsed(cfg: &ExperimentConfig, t: Instant) -> Option<f64> {
    cfg.output.runtime.then(|| t.elapsed().as_secs_f64())
}

pub struct SpiralDimOutput {
    pub rows: Vec<ResultRow>,
    pub trajectory: Option<Trajectory>,
}

/// Zoo spiral → each configured estimator, compared with the prediction.
pub fn cmd_spiral_dim(cfg: &ExperimentConfig) -> Result<SpiralDimOutput> {
    let model = cfg
        .model
        .as_deref()
        .ok_or_else(|| Error::Domain("spiral-dim needs `model`".into()))?;
    let zoo = zoo();
    let src = zoo.get(model)?;
    let pred = src.predict(&cfg.params)?;
    let curves = Registry::<dyn CurveEstimator>::curves(SausageOptions::default());
    let mut traj: Option<Trajectory> = None;
    let mut rows = Vec::new();
    for method in &cfg.estimate.methods {
        let t = Instant::now();
        let est = if method == "sector" {
            let sp = src
                .sector_spiral(&cfg.params)?
                .ok_or_else(|| Error::Domain(format!("model `{model}` has no sector form")))?;
            sector_dim(&sp, &SectorOptions::default())?
        } else {
            let est = curves.get(method)?;
            let tr = match &traj {
                Some(tr) => tr,
                None => traj.insert(src.trajectory(&cfg.params, &cfg.spiral)?),
            };
            let grid = spiral_grid(tr, cfg.estimate.scales)?;
            est.estimate(tr, &grid)?
        };
        let mut row = base_row(cfg, cfg.id.clone(), method, pred.as_ref());
        fill(&mut row, &est);
        row.runtime_s = elapsed(cfg, t);
        rows.push(row);
    }
    if let Some(path) = &cfg.output.trajectory {
        let tr = match &traj {
            Some(tr) => tr,
            None => traj.insert(src.trajectory(&cfg.params, &cfg.spiral)?),
        };
        write_trajectory(tr, path)?;
        if cfg.output.plot_script {
            write_plot_script(path)?;
        }
    }
    Ok(SpiralDimOutput {
        rows,
        trajectory: traj,
    })
}

pub fn write_trajectory(tr: &Trajectory, path: &Path) -> Result<()> {
    let mut out = csv::Writer::from_path(path)
        .map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
    let err = |e: csv::Error| Error::Domain(format!("{}: {e}", path.display()));
    out.write_record(["t", "x", "y"]).map_err(err)?;
    for p in &tr.points {
        out.write_record(p.iter().map(|v| format!("{v:.17e}")))
            .map_err(err)?;
    }
    out.flush().map_err(|e| io_err(path, e))
}

fn write_plot_script(data: &Path) -> Result<()> {
    let script = data.with_extension("py");
    let name = data
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("trajectory.csv");
    let body = format!(
        "import csv\nimport matplotlib.pyplot as plt\n\n\
         with open({name:?}) as fh:\n    rows = list(csv.DictReader(fh))\n\
         plt.plot([float(r['x']) for r in rows], [float(r['y']) for r in rows], lw=0.3)\n\
         plt.gca().set_aspect('equal')\nplt.savefig({png:?}, dpi=200)\n",
        png = format!("{}.png", name.trim_end_matches(".csv"))
    );
    std::fs::write(&script, body).map_err(|e| io_err(&script, e))
}

/// Sector estimates for the selected degenerate-focus rows; a failing row
/// is recorded in its `error` column.
pub fn cmd_table1(cfg: &ExperimentConfig) -> Vec<ResultRow> {
    let rows: Vec<[u32; 3]> = match &cfg.table1.rows {
        Some(r) => r.clone(),
        None => TABLE1.iter().map(|&(m, n, k, _)| [m, n, k]).collect(),
    };
    rows.par_iter()
        .map(|&[m, n, k]| table1_row(cfg, m, n, k))
        .collect()
}

fn table1_row(cfg: &ExperimentConfig, m: u32, n: u32, k: u32) -> ResultRow {
    let t = Instant::now();
    let experiment = format!("{}/{m}-{n}-{k}", cfg.id);
    let params = DegFocusParams::new(m, n, k, -1);
    let pred = params.as_ref().ok().map(predict_degfocus_dim);
    let mut row = base_row(cfg, experiment, "sector", pred.as_ref());
    row.reference = TABLE1
        .iter()
        .find(|r| (r.0, r.1, r.2) == (m, n, k))
        .map(|r| r.3);
    let est = params.and_then(|p| {
        let table = std::sync::Arc::new(gen_trig(m, n, 4000)?);
        let sp = crate::fracdim::PowerLawSpiral::degenerate_focus(&p, table, cfg.table1.r0)?;
        sector_dim(&sp, &SectorOptions::default())
    });
    match est {
        Ok(e) => fill(&mut row, &e),
        Err(e) => row.error = Some(e.to_string()),
    }
    row.runtime_s = elapsed(cfg, t);
    row
}

pub struct EntryExitOutput {
    pub row: ResultRow,
    pub hopf: HopfPoint,
    pub sequence: EntryExitSequence,
    pub estimate: DimensionEstimate,
}

/// Hopf point → (balanced level) → entry-exit sequence → dimension →
/// lattice snap and cyclicity bound.
pub fn cmd_entry_exit(cfg: &ExperimentConfig) -> Result<EntryExitOutput> {
    let t = Instant::now();
    let ee = cfg
        .entry_exit
        .as_ref()
        .ok_or_else(|| Error::Domain("entry-exit needs an [entry_exit] section".into()))?;
    let sys = PlanarSystem::from_strings(&ee.f, &ee.g, SystemKind::SlowFast)?;
    let hopf = find_slow_fast_hopf(&sys, (ee.guess[0], ee.guess[1]))?;
    let ctx = SdiContext::new(&sys, &hopf)?;
    let (mode, y0) = match ee.mode {
        ModeName::Hopf => {
            let y0 = ee
                .y0
                .ok_or_else(|| Error::Domain("hopf mode needs entry_exit.y0".into()))?;
            (Mode::Hopf, y0)
        }
        ModeName::Canard => {
            let ys = ctx.balanced_canard_level((ee.window[0], ee.window[1]), 64)?;
            (
                Mode::Canard(ys),
                ee.y0.unwrap_or(ys + ee.offset * hopf.fiber_side()),
            )
        }
    };
    let sequence = entry_exit_sequence(&ctx, y0, ee.n, mode)?;
    let name = cfg
        .estimate
        .sequence
        .clone()
        .unwrap_or_else(|| default_estimator(mode).to_string());
    let estimate = Registry::<dyn SequenceEstimator>::sequences()
        .get(&name)?
        .estimate(&sequence.values)?;
    let class = match mode {
        Mode::Hopf => classify_hopf(&estimate)?,
        Mode::Canard(_) => classify_canard(&estimate)?,
    };
    let mut row = base_row(cfg, cfg.id.clone(), &name, None);
    row.level = Some(mode.limit(&ctx));
    fill(&mut row, &estimate);
    row.snapped = Some(class.snapped.to_string());
    row.bound = Some(class.cyclicity_bound.to_string());
    row.runtime_s = elapsed(cfg, t);
    if let Some(path) = &cfg.output.sequence_csv {
        let f = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = std::io::BufWriter::new(f);
        sequence.write_csv(&mut w)?;
        w.flush().map_err(|e| io_err(path, e))?;
    }
    Ok(EntryExitOutput {
        row,
        hopf,
        sequence,
        estimate,
    })
}

/// `phi, Cs, Sn` over one period.
pub fn cmd_gen_trig<W: Write>(m: u32, n: u32, grid: usize, w: W) -> Result<()> {
    let table = gen_trig(m, n, grid)?;
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::Domain(format!("csv: {e}"));
    out.write_record(["phi", "cs", "sn"]).map_err(err)?;
    for s in &table.samples {
        out.write_record(s.iter().map(|v| format!("{v:.17e}")))
            .map_err(err)?;
    }
    out.flush().map_err(|e| Error::Domain(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::row::write_rows;
    use crate::fracdim::Bound;

    fn cfg(text: &str, o: &[&str]) -> ExperimentConfig {
        let o: Vec<String> = o.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::from_toml(text, &o).unwrap()
    }

    #[test]
    fn spiral_dim_rows_carry_the_prediction() {
        let c = cfg(
            "id = \"deg\"\nmodel = \"degfocus\"\n[params]\nm = 3\nn = 3\nk = 1\n[estimate]\nmethods = [\"sector\"]",
            &[],
        );
        let out = cmd_spiral_dim(&c).unwrap();
        assert_eq!(out.rows.len(), 1);
        let r = &out.rows[0];
        assert_eq!(r.predicted_exact.as_deref(), Some("12/7"));
        assert!((r.estimated.unwrap() - 12.0 / 7.0).abs() < 0.04);
        assert!(out.trajectory.is_none());
    }

    #[test]
    fn table1_selection_and_failures() {
        let c = cfg("id = \"t\"\n[table1]\nrows = []", &[]);
        assert!(cmd_table1(&c).is_empty());
        let c = cfg(
            "id = \"t\"\n[table1]\nrows = [[5, 3, 2]]\n[output]\nruntime = false",
            &[],
        );
        let rows = cmd_table1(&c);
        assert_eq!(rows[0].reference, Some(1.87287));
        assert_eq!(rows[0].predicted_exact.as_deref(), Some("122/65"));
        assert!((rows[0].estimated.unwrap() - 1.87692).abs() < 0.02);
        let again = cmd_table1(&c);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_rows(&mut a, &rows).unwrap();
        write_rows(&mut b, &again).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn entry_exit_pipeline() {
        let c = cfg(
            "id = \"ee\"\n[entry_exit]\nf = \"y - x^2\"\ng = \"-x + 0.3*x^2\"\ny0 = 1.0",
            &[],
        );
        let out = cmd_entry_exit(&c).unwrap();
        assert_eq!(out.row.snapped.as_deref(), Some("1/3"));
        assert_eq!(
            out.row.bound.as_deref(),
            Some(Bound::AtMost(1).to_string().as_str())
        );

        let sym = cfg(
            "id = \"s\"\n[entry_exit]\nf = \"y - x^2\"\ng = \"-x\"\ny0 = 0.5",
            &[],
        );
        let e = cmd_entry_exit(&sym).err().unwrap();
        assert_eq!(e.exit_code(), 4);
    }
}
