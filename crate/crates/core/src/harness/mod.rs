//! Configuration, persistence, sweeps, reports and the command line.

pub mod angle;
pub mod cli;
pub mod config;
pub mod report;
pub mod store;
pub mod sweep;

pub use angle::{format_angle, parse_angle};
pub use config::{OptimizeConfig, SweepConfig};
pub use report::{audit, curve_rows, decomposition_comparison};
pub use store::ResultStore;
pub use sweep::{run_sweep, SweepSpec};
