//! Fractal analysis of spiral trajectories and entry-exit sequences of planar
//! polynomial vector fields.

pub mod cli;
pub mod error;
pub mod flow;
pub mod fracdim;
pub mod models;
pub mod numerics;
pub mod regular;
pub mod slowfast;
pub mod zoo;

pub use error::{Error, ErrorClass, Result};
