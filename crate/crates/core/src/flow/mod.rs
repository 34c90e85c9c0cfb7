//! Trajectories, integration, sections and radial return maps.

pub mod integrate;
pub mod radial;
pub mod section;
pub mod trajectory;

pub use integrate::{integrate, resample_by_angle, spiral_sample, IntegrateOptions, StopCondition};
pub use radial::{
    cycle_deviation_orbit, cycle_multiplicity, cycle_radii, hopf_takens_focus_orbit, radial_map,
    radial_map_integrated,
};
pub use section::{section_crossings, CrossingSequence, Orientation, Section};
pub use trajectory::{winding, wrap_angle, Interpolant, Similarity, Trajectory};
