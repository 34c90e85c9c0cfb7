//! Config-driven experiment runner behind the `fracdyn` binary.

pub mod commands;
pub mod config;
pub mod formulas;
pub mod row;

pub use commands::{
    cmd_entry_exit, cmd_gen_trig, cmd_spiral_dim, cmd_table1, EntryExitOutput, SpiralDimOutput,
    TABLE1,
};
pub use config::{
    apply_override, EntryExitSettings, EstimateSettings, ExperimentConfig, ModeName, OutputSettings,
};
pub use formulas::{Formula, Number};
pub use row::{read_rows, write_rows, ResultRow};

/// Worker count from `FRACDYN_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var("FRACDYN_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
}
