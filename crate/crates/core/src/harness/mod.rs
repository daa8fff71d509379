//! Reconstruction scenarios, synthetic systems, experiment matrices and statistics.

mod matrix;
mod scenario;
pub mod stats;
pub mod synthetic;

pub use matrix::{
    csv_field, descriptive_stats, indicator_report, reference_front, run_definitions, run_matrix, slice_test, stats_csv,
    ExperimentMatrix, MatrixOutcome, ResultEntry, ResultSet, SliceKey, SystemEntry, DEFAULT_SEEDS_PER_CELL,
};
pub use scenario::{build_problem, mounting, scenario_model, ScenarioId, SCENARIO_LAYERS};
pub use stats::{describe, kruskal_wallis, median, KruskalWallis, StatReport};
pub use synthetic::{make_synthetic_system, SyntheticSpec, SyntheticSystem};
