//! Experiment orchestration behind the command line front end.

mod commands;
mod config;
mod io;

pub use commands::{
    cmd_ground_truth, cmd_metrics, cmd_sample, cmd_sweep, execute, load_ground_truth, SweepRow,
};
pub use config::{
    from_pairs, parse_config, parse_config_with, parse_pairs, ExperimentConfig, GroundTruthSource, MapKind,
    MetricKind, SamplerChoice, TargetSpec,
};
pub use io::{fmt_f64, read_matrix_csv, write_json, write_matrix_csv, write_trace_csv};
