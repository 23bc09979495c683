//! Configuration, Monte Carlo orchestration, experiments and persistence.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod manifest;
pub mod output;
pub mod reduce;

pub use config::{parse_config, regularity_sigma, Checks, ExperimentConfig};
pub use experiments::{
    couple_steps, ensemble_map, riemann_error, run_and_write, run_contraction, run_energy,
    run_experiment, run_regularity, run_simulate, run_viscosity, sample_times, Experiment,
    ExperimentReport,
};
pub use manifest::{path_seed, path_seeds, RunManifest, RunStatus};
pub use output::{emit_csv, PathCheckpoint, Table};
pub use reduce::{monte_carlo_reduce, Accumulator};
