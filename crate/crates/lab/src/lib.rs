//! Experiment pipelines, artifact formats and the `lqg` command-line tool
//! built on `lqg-core`.

pub mod config;
pub mod ensemble;
pub mod io;
pub mod pipelines;
pub mod render;
pub mod validate;

pub use config::{Experiment, RunConfig};
pub use pipelines::{run, Check, Report};
