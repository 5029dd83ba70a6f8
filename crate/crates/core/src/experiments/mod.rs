//! Instance generators, group constructors and the experiment drivers.

pub mod commands;
pub mod generators;
pub mod groups;
pub mod noise;
pub mod table1;

pub use commands::{
    cmd_classify, cmd_counterexample, cmd_grid_symmetries, counterexample_graph, CounterexampleReport,
    GridReport,
};
pub use noise::{cmd_noise_experiment, default_exponents, ExperimentConfig, Method, NoiseResults, RatioRow, TrialRecord};
pub use table1::{cmd_table1, extreme_point_trial, table1_row, write_csv, ExtremeTrial, Table1Row};
