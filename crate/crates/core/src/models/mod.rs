//! Model systems: polynomial vector fields, closed-form spirals and
//! generalized trigonometric functions.

pub mod gentrig;
pub mod poly;
pub mod spiral;
pub mod system;

pub use gentrig::{gen_trig, gen_trig_with_tol, period_formula, GenTrigTable};
pub use poly::Polynomial2;
pub use spiral::{closed_spiral, ClosedSpiralKind};
pub use system::{
    degenerate_focus, hopf_takens, Approach, DegFocusParams, HopfTakensParams, PlanarSystem,
    SystemKind,
};
