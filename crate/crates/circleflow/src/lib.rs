//! IO, configuration and experiment drivers around `circleflow-core`.
//!
//! The core crate holds all the mathematics; this one owns everything that
//! touches the filesystem: the snapshot text formats, the JSON experiment
//! configuration, the command dispatcher behind the `circleflow` binary, and
//! the bundled validation suite.

pub use circleflow_core as core;

pub mod config;
pub mod experiment;
pub mod io;
pub mod validate;
