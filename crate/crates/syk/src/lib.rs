//! File formats, ensemble runs and the command-line front end for sparse
//! SYK spectral statistics. The numerics live in `syk-core`.

pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod fixture;
pub mod output;
pub mod persist;
pub mod presets;

pub use config::RunConfig;
pub use ensemble::{run, run_detailed, sweep, EnsembleResult, RealizationSummary};
pub use error::{Error, Result};
pub use fixture::{Fixture, FixtureReport};
