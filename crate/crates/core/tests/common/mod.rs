#![allow(dead_code)]

use std::path::{Path, PathBuf};

use archrecon_core::harness::{make_synthetic_system, SyntheticSpec, SyntheticSystem};
use archrecon_core::search::RunConfig;
use archrecon_core::store::RunDefinition;
use archrecon_core::{Algorithm, ModelDocument, Pin, ScenarioId};

pub fn small_system(seed: u64) -> SyntheticSystem {
    make_synthetic_system(&SyntheticSpec::new(30, 6, 4, 0.1, seed)).unwrap()
}

pub fn quick_config(algorithm: Algorithm, scenario: ScenarioId, seed: u64) -> RunConfig {
    RunConfig {
        algorithm,
        scenario,
        seed,
        population: 10,
        max_evaluations: 300,
        snapshot_interval: 50,
        ..RunConfig::default()
    }
}

pub fn definition(sys: &SyntheticSystem, pins: &[Pin], config: RunConfig) -> RunDefinition {
    RunDefinition {
        system: "small".into(),
        graph: sys.graph.to_document(),
        model: ModelDocument::from_model(&sys.model, pins),
        config,
    }
}

/// Writes `<name>.graph.json` and `<name>.model.json` into `dir`.
pub fn write_system(dir: &Path, name: &str, sys: &SyntheticSystem, pins: &[Pin]) -> (PathBuf, PathBuf) {
    let graph = dir.join(format!("{name}.graph.json"));
    let model = dir.join(format!("{name}.model.json"));
    std::fs::write(&graph, serde_json::to_string_pretty(&sys.graph.to_document()).unwrap()).unwrap();
    std::fs::write(
        &model,
        serde_json::to_string_pretty(&ModelDocument::from_model(&sys.model, pins)).unwrap(),
    )
    .unwrap();
    (graph, model)
}
