//! Experiment driver: configuration, stationary statistics, fits and the
//! CSV/JSON outputs consumed by the plotting scripts.

pub mod config;
pub mod ensemble;
pub mod output;
pub mod run;
pub mod stats;
pub mod verify;

pub use config::{Analyses, ExperimentConfig};
pub use run::{run_experiment, simulate, sweep, ExperimentResult, SweepAxis, SweepRow};
pub use stats::{
    fit_profile_3sine, pearson_correlation, rebound_time, stationary_summary, ChiSquare, GaussianFit, Histogram,
    StationarySummary, ThreeSineFit,
};
