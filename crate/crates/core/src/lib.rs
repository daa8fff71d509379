//! Layered architecture reconstruction by multi-objective search.
//!
//! A [`DependencyGraph`] of types is assigned to package slots and layers of a
//! [`ConceptualModel`]. Candidate assignments are scored on eight minimized
//! design objectives and searched with evolutionary optimizers; resulting
//! fronts are compared with quality indicators and rank statistics.

pub mod error;
pub mod explore;
pub mod graph;
pub mod harness;
pub mod indicators;
pub mod objectives;
pub mod pareto;
pub mod search;
pub mod store;

pub use error::{Error, Result};
pub use graph::{
    bind_pins, package_graph, parse_graph, parse_model, ArchitectureSolution, ConceptualModel, DependencyGraph,
    GraphDocument, LayerStyle, ModelDocument, PackageGraph, Pin, PinTable, TypeNode,
};
pub use harness::{ExperimentMatrix, ResultSet, ScenarioId, SliceKey, StatReport};
pub use indicators::{IndicatorRecord, IndicatorSuite, IndicatorValues, ReferenceFront};
pub use objectives::{evaluate, Aggregation, ObjectiveVector, OBJECTIVE_COUNT, OBJECTIVE_NAMES};
pub use pareto::Front;
pub use search::{Algorithm, FrontMember, Problem, RunConfig, RunResult, Snapshot};
pub use store::{Outcome, RunDefinition, RunRecord, RunStatus, Store};
