//! On-disk result store: one directory per run.
//!
//! ```text
//! <root>/runs/<id>/definition.json   graph, model and config needed to reproduce the run
//!                  config.json       config echo
//!                  snapshots.jsonl   one snapshot per line
//!                  front.json        final front with decoded assignments
//!                  record.json       status
//! ```
//!
//! A run is complete once `front.json` exists and its record says `done`.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{graph_from_document, model_from_document, DependencyGraph, GraphDocument, ModelDocument, Pin};
use crate::harness::build_problem;
use crate::search::{run_streaming, FrontMember, Problem, RunConfig, RunOptions, RunResult, Snapshot, SnapshotSink};

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDefinition {
    pub system: String,
    pub graph: GraphDocument,
    pub model: ModelDocument,
    pub config: RunConfig,
}

impl RunDefinition {
    /// Content hash of the definition; stable across re-serialization.
    pub fn id(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("definitions serialize");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Binds the problem this definition describes.
    pub fn problem(&self) -> Result<Problem> {
        let graph = Arc::new(graph_from_document(self.graph.clone())?);
        let (model, pins) = model_from_document(self.model.clone())?;
        build_problem(self.config.scenario, graph, &model, &pins, self.config.seed)
    }

    pub fn pins(&self) -> &[Pin] {
        &self.model.pins
    }

    pub fn dependency_graph(&self) -> Result<DependencyGraph> {
        graph_from_document(self.graph.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub id: String,
    pub status: RunStatus,
    pub system: String,
    pub config: RunConfig,
    pub store_path: PathBuf,
    pub latest_eval_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

/// Whether `execute` did any work.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    AlreadyComplete(RunRecord),
    Executed(RunRecord),
}

impl Outcome {
    pub fn record(&self) -> &RunRecord {
        match self {
            Outcome::AlreadyComplete(r) | Outcome::Executed(r) => r,
        }
    }
}

const DEFINITION: &str = "definition.json";
const CONFIG: &str = "config.json";
const SNAPSHOTS: &str = "snapshots.jsonl";
const FRONT: &str = "front.json";
const RECORD: &str = "record.json";

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::CorruptStore {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

struct JsonLines {
    out: BufWriter<File>,
    path: PathBuf,
    last_eval: usize,
}

impl SnapshotSink for JsonLines {
    fn snapshot(&mut self, snapshot: &Snapshot) -> Result<()> {
        serde_json::to_writer(&mut self.out, snapshot)?;
        self.out.write_all(b"\n").map_err(|e| Error::io(&self.path, e))?;
        self.last_eval = snapshot.eval_count;
        Ok(())
    }
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        let runs = root.join("runs");
        fs::create_dir_all(&runs).map_err(|e| Error::io(&runs, e))?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn run_dir(&self, id: &str) -> PathBuf {
        self.root.join("runs").join(id)
    }

    fn checked_dir(&self, id: &str) -> Result<PathBuf> {
        if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(Error::NotFound(format!("run `{id}`")));
        }
        let dir = self.run_dir(id);
        if !dir.join(RECORD).exists() {
            return Err(Error::NotFound(format!("run `{id}`")));
        }
        Ok(dir)
    }

    pub fn is_complete(&self, id: &str) -> bool {
        let dir = self.run_dir(id);
        dir.join(FRONT).exists()
            && read_json::<RunRecord>(&dir.join(RECORD)).is_ok_and(|r| r.status == RunStatus::Done)
    }

    fn write_record(&self, record: &RunRecord) -> Result<()> {
        let bytes = serde_json::to_vec_pretty(record)?;
        write_atomic(&self.run_dir(&record.id).join(RECORD), &bytes)
    }

    /// Registers a run without executing it; an existing complete run is left alone.
    pub fn enqueue(&self, def: &RunDefinition) -> Result<RunRecord> {
        def.config.validate()?;
        let id = def.id();
        if self.is_complete(&id) {
            return self.record(&id);
        }
        let dir = self.run_dir(&id);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        write_atomic(&dir.join(DEFINITION), &serde_json::to_vec_pretty(def)?)?;
        write_atomic(&dir.join(CONFIG), &serde_json::to_vec_pretty(&def.config)?)?;
        let record = RunRecord {
            id,
            status: RunStatus::Queued,
            system: def.system.clone(),
            config: def.config.clone(),
            store_path: dir,
            latest_eval_count: 0,
            error: None,
            wall_time: None,
        };
        self.write_record(&record)?;
        Ok(record)
    }

    /// Executes a run unless it is already complete. Partial leftovers from an
    /// interrupted attempt are discarded and the run starts over.
    pub fn execute(&self, def: &RunDefinition) -> Result<Outcome> {
        let id = def.id();
        if self.is_complete(&id) {
            return Ok(Outcome::AlreadyComplete(self.record(&id)?));
        }
        let mut record = self.enqueue(def)?;
        let problem = match def.problem() {
            Ok(p) => p,
            Err(e) => return self.fail(record, e),
        };
        record.status = RunStatus::Running;
        self.write_record(&record)?;
        match self.execute_problem(&problem, def, &record) {
            Ok(result) => {
                record.status = RunStatus::Done;
                record.latest_eval_count = result.evaluations;
                record.wall_time = Some(result.wall_time);
                self.write_record(&record)?;
                Ok(Outcome::Executed(record))
            }
            Err(e) => self.fail(record, e),
        }
    }

    fn fail(&self, mut record: RunRecord, error: Error) -> Result<Outcome> {
        record.status = RunStatus::Failed;
        record.error = Some(error.to_string());
        self.write_record(&record)?;
        Err(error)
    }

    fn execute_problem(&self, problem: &Problem, def: &RunDefinition, record: &RunRecord) -> Result<RunResult> {
        let dir = &record.store_path;
        let path = dir.join(SNAPSHOTS);
        let _ = fs::remove_file(dir.join(FRONT));
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut sink = JsonLines {
            out: BufWriter::new(file),
            path: path.clone(),
            last_eval: 0,
        };
        let result = run_streaming(problem, &def.config, RunOptions::default(), &mut sink)?;
        sink.out.flush().map_err(|e| Error::io(&path, e))?;
        write_atomic(&dir.join(FRONT), &serde_json::to_vec(&result.final_front)?)?;
        Ok(result)
    }

    pub fn record(&self, id: &str) -> Result<RunRecord> {
        read_json(&self.checked_dir(id)?.join(RECORD))
    }

    pub fn definition(&self, id: &str) -> Result<RunDefinition> {
        read_json(&self.checked_dir(id)?.join(DEFINITION))
    }

    /// Final front of a completed run.
    pub fn front(&self, id: &str) -> Result<Vec<FrontMember>> {
        let dir = self.checked_dir(id)?;
        let path = dir.join(FRONT);
        if !path.exists() {
            return Err(Error::NotFound(format!("front of run `{id}` (not finished)")));
        }
        read_json(&path)
    }

    /// Snapshots with `eval_count >= from`.
    pub fn snapshots(&self, id: &str, from: usize) -> Result<Vec<Snapshot>> {
        let path = self.checked_dir(id)?.join(SNAPSHOTS);
        if !path.exists() {
            return Ok(Vec::new());
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut out = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.is_empty() {
                continue;
            }
            // torn final line of a run in progress
            let Ok(snapshot) = serde_json::from_str::<Snapshot>(&line) else {
                break;
            };
            if snapshot.eval_count >= from {
                out.push(snapshot);
            }
        }
        Ok(out)
    }

    /// Raw bytes of `snapshots.jsonl`.
    pub fn snapshot_bytes(&self, id: &str) -> Result<Vec<u8>> {
        let path = self.checked_dir(id)?.join(SNAPSHOTS);
        fs::read(&path).map_err(|e| Error::io(&path, e))
    }

    /// Records of every run in the store, sorted by id.
    pub fn list(&self) -> Result<Vec<RunRecord>> {
        let runs = self.root.join("runs");
        let mut out = Vec::new();
        for entry in fs::read_dir(&runs).map_err(|e| Error::io(&runs, e))? {
            let entry = entry.map_err(|e| Error::io(&runs, e))?;
            let path = entry.path().join(RECORD);
            if path.exists() {
                out.push(read_json::<RunRecord>(&path)?);
            }
        }
        out.sort_by(|a, b| a.id.cmp(&b.id));
        Ok(out)
    }

    pub fn mark(&self, id: &str, status: RunStatus, error: Option<String>) -> Result<RunRecord> {
        let mut record = self.record(id)?;
        record.status = status;
        record.error = error;
        self.write_record(&record)?;
        Ok(record)
    }
}
