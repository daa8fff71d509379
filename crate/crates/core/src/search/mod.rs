//! Genotype encoding, variation operators and multi-objective optimizers.

mod config;
mod encoding;
mod gde3;
mod nsga2;
mod omopso;
mod operators;
mod problem;
mod random;
mod run;

pub use config::{Algorithm, RunConfig};
pub use encoding::{decode, fixed_layers, FreezeMask, Genotype};
pub use operators::{mutate_in_place, polynomial_mutation, sbx_crossover};
pub use problem::{InitPolicy, Problem};
pub use run::{run, run_streaming, run_with, FrontMember, RunOptions, RunResult, Snapshot, SnapshotSink};

pub use crate::pareto::{dominates, nondominated_filter, Archive, Front};
