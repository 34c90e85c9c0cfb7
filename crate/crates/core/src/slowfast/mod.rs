//! Slow-fast systems x' = f, y' = εg: critical curve, slow-fast Hopf
//! points, slow divergence integral and entry-exit sequences, with
//! cyclicity bounds read off the dimension of those sequences.

pub mod branch;
pub mod entry_exit;
pub mod sdi;

pub use branch::{
    critical_branches, fast_fiber_endpoints, find_slow_fast_hopf, slow_vf_x, Concavity,
    CriticalBranch, HopfCerts, HopfPoint, Stability, Window,
};
pub use entry_exit::{
    entry_exit_next, entry_exit_sequence, EntryExitSequence, Mode, SdiSign, DEFAULT_LEN,
};
pub use sdi::{
    balanced_canard_level, check_assumption2, sdi, tilde_i, Assumption2, SdiContext, SdiValue,
};

use crate::error::Result;
use crate::fracdim::{snap_to_lattice, Classification, DimensionEstimate, Lattice, DEFAULT_GATE};

/// Sequence estimator used by default for each mode.
pub fn default_estimator(mode: Mode) -> &'static str {
    match mode {
        Mode::Hopf => "gap",
        Mode::Canard(_) => "order",
    }
}

pub fn classify_hopf(d: &DimensionEstimate) -> Result<Classification> {
    snap_to_lattice(d, Lattice::Hopf, DEFAULT_GATE)
}

pub fn classify_canard(d: &DimensionEstimate) -> Result<Classification> {
    snap_to_lattice(d, Lattice::Canard, DEFAULT_GATE)
}
