//! Multi-seed experiment matrices over a result store.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::ScenarioId;
use super::stats::{describe, kruskal_wallis, KruskalWallis, StatReport};
use crate::error::{Error, Result};
use crate::graph::{parse_graph, parse_model, ModelDocument};
use crate::indicators::{build_reference_front, IndicatorRecord, IndicatorSuite, ReferenceFront};
use crate::objectives::OBJECTIVE_NAMES;
use crate::pareto::Front;
use crate::search::{Algorithm, FrontMember, RunConfig};
use crate::store::{Outcome, RunDefinition, RunRecord, RunStatus, Store};

pub const DEFAULT_SEEDS_PER_CELL: usize = 10;

/// A system under study: graph and model files, relative to the matrix file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemEntry {
    pub name: String,
    pub graph: PathBuf,
    pub model: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentMatrix {
    pub algorithms: Vec<Algorithm>,
    pub systems: Vec<SystemEntry>,
    pub scenarios: Vec<ScenarioId>,
    /// Explicit seeds; when absent, seeds `0..seeds_per_cell`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "default_seeds")]
    pub seeds_per_cell: usize,
    /// Settings shared by every run (algorithm, scenario and seed are overwritten).
    #[serde(default)]
    pub base: RunConfig,
}

fn default_seeds() -> usize {
    DEFAULT_SEEDS_PER_CELL
}

impl ExperimentMatrix {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut matrix: ExperimentMatrix =
            serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for system in &mut matrix.systems {
            system.graph = dir.join(&system.graph);
            system.model = dir.join(&system.model);
        }
        Ok(matrix)
    }

    pub fn seed_list(&self) -> Vec<u64> {
        match &self.seeds {
            Some(seeds) => seeds.clone(),
            None => (0..self.seeds_per_cell as u64).collect(),
        }
    }

    pub fn run_count(&self) -> usize {
        self.algorithms.len() * self.systems.len() * self.scenarios.len() * self.seed_list().len()
    }

    /// One definition per (algorithm, system, scenario, seed).
    pub fn definitions(&self) -> Result<Vec<RunDefinition>> {
        let mut out = Vec::with_capacity(self.run_count());
        for system in &self.systems {
            let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
            let graph = parse_graph(&read(&system.graph)?)?;
            let (model, pins) = parse_model(&read(&system.model)?)?;
            let graph_doc = graph.to_document();
            let model_doc = ModelDocument::from_model(&model, &pins);
            for &algorithm in &self.algorithms {
                for &scenario in &self.scenarios {
                    for seed in self.seed_list() {
                        let config = RunConfig {
                            algorithm,
                            scenario,
                            seed,
                            ..self.base.clone()
                        };
                        config.validate()?;
                        out.push(RunDefinition {
                            system: system.name.clone(),
                            graph: graph_doc.clone(),
                            model: model_doc.clone(),
                            config,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// What a matrix invocation did.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MatrixOutcome {
    pub run_ids: Vec<String>,
    pub executed: usize,
    pub skipped: usize,
    /// `(run id, error)` of every run that failed.
    pub failed: Vec<(String, String)>,
}

/// Executes every run of `matrix` on `workers` threads, skipping completed ones.
/// A failed run is recorded and the rest continue; an unreadable store aborts.
pub fn run_matrix(matrix: &ExperimentMatrix, store: &Store, workers: usize) -> Result<MatrixOutcome> {
    let definitions = matrix.definitions()?;
    run_definitions(&definitions, store, workers)
}

pub fn run_definitions(definitions: &[RunDefinition], store: &Store, workers: usize) -> Result<MatrixOutcome> {
    // fails fast on a corrupt store
    store.list()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let results: Vec<(String, Result<Outcome>)> =
        pool.install(|| definitions.par_iter().map(|d| (d.id(), store.execute(d))).collect());

    let mut outcome = MatrixOutcome::default();
    for (id, result) in results {
        match result {
            Ok(Outcome::Executed(_)) => outcome.executed += 1,
            Ok(Outcome::AlreadyComplete(_)) => outcome.skipped += 1,
            Err(e @ (Error::CorruptStore { .. } | Error::Io { .. })) => return Err(e),
            Err(e) => {
                log::warn!("run {id} failed: {e}");
                outcome.failed.push((id.clone(), e.to_string()));
            }
        }
        outcome.run_ids.push(id);
    }
    Ok(outcome)
}

/// Dimension a result set can be sliced along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceKey {
    Algorithm,
    System,
    Scenario,
}

impl FromStr for SliceKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algorithm" => Ok(SliceKey::Algorithm),
            "system" => Ok(SliceKey::System),
            "scenario" => Ok(SliceKey::Scenario),
            other => Err(Error::Config(format!("unknown slice `{other}` (algorithm, system, scenario)"))),
        }
    }
}

impl fmt::Display for SliceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SliceKey::Algorithm => "algorithm",
            SliceKey::System => "system",
            SliceKey::Scenario => "scenario",
        })
    }
}

/// A completed run with its final front.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultEntry {
    pub record: RunRecord,
    pub front: Vec<FrontMember>,
}

impl ResultEntry {
    pub fn slice_value(&self, key: SliceKey) -> String {
        match key {
            SliceKey::Algorithm => self.record.config.algorithm.id().to_string(),
            SliceKey::System => self.record.system.clone(),
            SliceKey::Scenario => self.record.config.scenario.id().to_string(),
        }
    }

    pub fn slice_label(&self, keys: &[SliceKey]) -> String {
        keys.iter().map(|&k| self.slice_value(k)).collect::<Vec<_>>().join("/")
    }

    pub fn objectives(&self) -> Front {
        Front {
            points: self.front.iter().map(|m| m.objectives.0.to_vec()).collect(),
        }
    }
}

/// Completed runs loaded from a store.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultSet {
    pub entries: Vec<ResultEntry>,
}

impl ResultSet {
    /// Every completed run in the store.
    pub fn load(store: &Store) -> Result<Self> {
        let ids: Vec<String> = store
            .list()?
            .into_iter()
            .filter(|r| r.status == RunStatus::Done)
            .map(|r| r.id)
            .collect();
        Self::load_runs(store, &ids)
    }

    pub fn load_runs(store: &Store, ids: &[String]) -> Result<Self> {
        let entries = ids
            .iter()
            .map(|id| {
                Ok(ResultEntry {
                    record: store.record(id)?,
                    front: store.front(id)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(ResultSet { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries grouped by slice label, in label order.
    pub fn slices(&self, keys: &[SliceKey]) -> BTreeMap<String, Vec<&ResultEntry>> {
        let mut out: BTreeMap<String, Vec<&ResultEntry>> = BTreeMap::new();
        for e in &self.entries {
            out.entry(e.slice_label(keys)).or_default().push(e);
        }
        out
    }

    /// Final-front values of `objective` pooled per slice.
    pub fn pooled(&self, keys: &[SliceKey], objective: usize) -> BTreeMap<String, Vec<f64>> {
        self.slices(keys)
            .into_iter()
            .map(|(label, entries)| {
                let values = entries
                    .iter()
                    .flat_map(|e| e.front.iter().map(|m| m.objectives.0[objective]))
                    .collect();
                (label, values)
            })
            .collect()
    }
}

/// Min, max and median of one objective over every final-front solution,
/// per slice. Slices without solutions are omitted with a warning.
pub fn descriptive_stats(results: &ResultSet, keys: &[SliceKey], objective: usize) -> Vec<StatReport> {
    let metric = OBJECTIVE_NAMES[objective];
    results
        .pooled(keys, objective)
        .into_iter()
        .filter_map(|(label, values)| {
            let report = describe(&label, metric, &values);
            if report.is_none() {
                log::warn!("slice `{label}` has no solutions; omitted");
            }
            report
        })
        .collect()
}

/// Kruskal-Wallis across the slices' pooled objective values.
pub fn slice_test(results: &ResultSet, keys: &[SliceKey], objective: usize) -> Result<KruskalWallis> {
    let groups: Vec<Vec<f64>> = results
        .pooled(keys, objective)
        .into_values()
        .filter(|v| !v.is_empty())
        .collect();
    kruskal_wallis(&groups)
}

/// CSV with columns `slice,metric,min,max,median,n`.
pub fn stats_csv(reports: &[StatReport]) -> String {
    let mut out = String::from("slice,metric,min,max,median,n\n");
    for r in reports {
        out.push_str(&format!("{},{},{},{},{},{}\n", csv_field(&r.slice), r.metric, r.min, r.max, r.median, r.n));
    }
    out
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reference front over the final fronts of `ids`.
pub fn reference_front(store: &Store, ids: &[String]) -> Result<ReferenceFront> {
    let fronts = ids
        .iter()
        .map(|id| {
            let points = store.front(id)?.into_iter().map(|m| m.objectives.0.to_vec()).collect();
            Ok((id.clone(), Front { points }))
        })
        .collect::<Result<Vec<_>>>()?;
    build_reference_front(&fronts)
}

/// Indicator values of every `stride`-th snapshot (and the last) of each run,
/// against the reference front of the runs' final fronts.
pub fn indicator_report(store: &Store, ids: &[String], stride: usize) -> Result<Vec<IndicatorRecord>> {
    let suite = IndicatorSuite::new(reference_front(store, ids)?)?;
    let stride = stride.max(1);
    let mut out = Vec::new();
    for id in ids {
        let snapshots = store.snapshots(id, 0)?;
        let last = snapshots.len().saturating_sub(1);
        for (i, s) in snapshots.iter().enumerate() {
            if (i + 1) % stride != 0 && i != last {
                continue;
            }
            out.push(IndicatorRecord {
                run: id.clone(),
                evals: s.eval_count,
                values: suite.evaluate(id, &s.archive)?,
            });
        }
    }
    Ok(out)
}
