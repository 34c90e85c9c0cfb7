use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use fracdyn::cli::{
    cmd_entry_exit, cmd_gen_trig, cmd_spiral_dim, cmd_table1, threads_from_env, write_rows,
    ExperimentConfig, Formula, Number, ResultRow,
};
use fracdyn::fracdim::Lattice;

#[derive(Parser)]
#[command(
    name = "fracdyn",
    version,
    about = "Box dimensions of spirals and entry-exit sequences, with cyclicity bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML experiment manifest.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Dotted override, e.g. `params.alpha=0.5`. Repeatable.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Result CSV path (overrides `output.csv`); stdout when neither is given.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the dimension of a zoo spiral and compare with the prediction.
    SpiralDim(RunArgs),
    /// Degenerate-focus table: conjectured, reference and estimated dimensions.
    Table1(RunArgs),
    /// Slow-fast entry-exit sequence, its dimension and the cyclicity bound.
    EntryExit(RunArgs),
    /// Evaluate closed-form dimension and cyclicity formulas.
    Formulas {
        #[command(subcommand)]
        formula: FormulaCmd,
    },
    /// Dump a generalized trigonometric table as `phi,cs,sn`.
    GenTrig {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeArg {
    Hopf,
    Canard,
}

#[derive(Subcommand)]
enum FormulaCmd {
    /// Weak focus of order l with coefficients a_0..a_{l-1}.
    HopfTakens {
        #[arg(num_args = 1.., allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
    },
    /// Limit cycle of multiplicity m.
    LimitCycle { m: u32 },
    /// Degenerate focus (m, n, k).
    DegFocus { m: u32, n: u32, k: u32 },
    /// Spiral in 3D with exponents a1, b2.
    ThreeD {
        #[arg(allow_hyphen_values = true)]
        a1: f64,
        #[arg(allow_hyphen_values = true)]
        b2: f64,
    },
    /// Power spiral r = phi^-alpha.
    PowerSpiral { alpha: f64 },
    /// Saddle loop of codimension k.
    SaddleLoop { k: u32 },
    /// Spiral dimension of a polycycle from its sequence dimensions.
    Polycycle {
        #[arg(num_args = 1.., required = true)]
        dims: Vec<f64>,
    },
    /// Cyclicity bound of a two-saddle cycle.
    TwoSaddle { d1: Number, d2: Number },
    /// Bound of a rectifiable two-saddle cycle.
    TwoSaddleRectifiable,
    /// Cyclicity bound from a dimension on a lattice.
    Classify {
        #[arg(value_enum)]
        lattice: LatticeArg,
        d: Number,
    },
}

impl From<FormulaCmd> for Formula {
    fn from(c: FormulaCmd) -> Self {
        match c {
            FormulaCmd::HopfTakens { a } => Formula::HopfTakens { a },
            FormulaCmd::LimitCycle { m } => Formula::LimitCycle { m },
            FormulaCmd::DegFocus { m, n, k } => Formula::DegFocus { m, n, k },
            FormulaCmd::ThreeD { a1, b2 } => Formula::ThreeD { a1, b2 },
            FormulaCmd::PowerSpiral { alpha } => Formula::PowerSpiral { alpha },
            FormulaCmd::SaddleLoop { k } => Formula::SaddleLoop { codim: k },
            FormulaCmd::Polycycle { dims } => Formula::Polycycle { dims },
            FormulaCmd::TwoSaddle { d1, d2 } => Formula::TwoSaddle { d1, d2 },
            FormulaCmd::TwoSaddleRectifiable => Formula::TwoSaddleRectifiable,
            FormulaCmd::Classify { lattice, d } => Formula::Classify {
                lattice: match lattice {
                    LatticeArg::Hopf => Lattice::Hopf,
                    LatticeArg::Canard => Lattice::Canard,
                },
                d,
            },
        }
    }
}

fn load(args: &RunArgs, default_id: &str) -> Result<ExperimentConfig> {
    let cfg = match &args.config {
        Some(p) => ExperimentConfig::from_path(p, &args.set)?,
        None => ExperimentConfig::from_toml(&format!("id = {default_id:?}"), &args.set)?,
    };
    Ok(cfg)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(args: &RunArgs, cfg: &ExperimentConfig, rows: &[ResultRow]) -> Result<()> {
    let path = args.out.as_deref().or(cfg.output.csv.as_deref());
    let mut w = open_out(path)?;
    write_rows(&mut w, rows)?;
    w.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SpiralDim(args) => {
            let cfg = load(&args, "spiral-dim")?;
            let out = cmd_spiral_dim(&cfg)?;
            emit(&args, &cfg, &out.rows)
        }
        Command::Table1(args) => {
            let cfg = load(&args, "table1")?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads_from_env() {
                pool = pool.num_threads(n);
            }
            let rows = pool.build()?.install(|| cmd_table1(&cfg));
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!(
                    "{}: {}",
                    r.experiment,
                    r.error.as_deref().unwrap_or_default()
                );
            }
            emit(&args, &cfg, &rows)
        }
        Command::EntryExit(args) => {
            let cfg = load(&args, "entry-exit")?;
            let out = cmd_entry_exit(&cfg)?;
            eprintln!(
                "hopf point ({:.6}, {:.6}), {} terms, d = {:.4} ± {:.4}",
                out.hopf.location.0,
                out.hopf.location.1,
                out.sequence.values.len(),
                out.estimate.value,
                out.estimate.stderr
            );
            emit(&args, &cfg, std::slice::from_ref(&out.row))
        }
        Command::Formulas { formula } => {
            println!("{}", Formula::from(formula).evaluate()?);
            Ok(())
        }
        Command::GenTrig { m, n, grid, out } => {
            let w = open_out(out.as_deref())?;
            cmd_gen_trig(m, n, grid, w)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e
                .downcast_ref::<fracdyn::Error>()
                .map_or(1, fracdyn::Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
