use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Algorithm, RunConfig};
use super::encoding::Genotype;
use super::problem::Problem;
use super::{gde3, nsga2, omopso, random};
use crate::error::Result;
use crate::graph::ArchitectureSolution;
use crate::objectives::ObjectiveVector;
use crate::pareto::{Archive, Front};

/// State of a run at a multiple of the snapshot interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    #[serde(rename = "evals")]
    pub eval_count: usize,
    pub archive: Front,
    #[serde(rename = "pop")]
    pub population_objectives: Vec<ObjectiveVector>,
}

/// A final-front member with its decoded assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMember {
    pub objectives: ObjectiveVector,
    #[serde(flatten)]
    pub solution: ArchitectureSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: RunConfig,
    /// Every snapshot, unless the run streamed them to a sink; then only the last.
    pub snapshots: Vec<Snapshot>,
    pub final_front: Vec<FrontMember>,
    pub evaluations: usize,
    pub wall_time: f64,
    /// Every evaluated objective vector, in order, when tracing was requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<ObjectiveVector>>,
}

impl RunResult {
    pub fn final_objectives(&self) -> Front {
        Front {
            points: self.final_front.iter().map(|m| m.objectives.0.to_vec()).collect(),
        }
    }
}

/// Receives snapshots as the run produces them.
pub trait SnapshotSink {
    fn snapshot(&mut self, snapshot: &Snapshot) -> Result<()>;
}

impl SnapshotSink for Vec<Snapshot> {
    fn snapshot(&mut self, snapshot: &Snapshot) -> Result<()> {
        self.push(snapshot.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record every evaluated objective vector.
    pub trace: bool,
}

/// Shared evaluation machinery handed to each optimizer.
pub(crate) struct Search<'a> {
    pub problem: &'a Problem,
    pub config: &'a RunConfig,
    pub rng: ChaCha8Rng,
    evaluations: usize,
    archive: Archive<Genotype>,
    pending: Vec<(usize, Front)>,
    last: Option<Snapshot>,
    sink: &'a mut dyn SnapshotSink,
    trace: Option<Vec<ObjectiveVector>>,
    failed: Option<crate::error::Error>,
}

impl<'a> Search<'a> {
    pub fn remaining(&self) -> usize {
        if self.failed.is_some() {
            return 0;
        }
        self.config.max_evaluations - self.evaluations
    }

    /// Evaluates up to `remaining()` genotypes (extra ones are dropped) and
    /// returns the kept genotypes with their objectives.
    pub fn evaluate(&mut self, mut genotypes: Vec<Genotype>) -> Vec<(Genotype, ObjectiveVector)> {
        genotypes.truncate(self.remaining());
        let problem = self.problem;
        let aggregation = self.config.aggregation;
        let objectives: Vec<ObjectiveVector> = genotypes
            .par_iter()
            .map(|g| problem.evaluate(g, aggregation))
            .collect();
        for (g, obj) in genotypes.iter().zip(&objectives) {
            self.evaluations += 1;
            self.archive.insert(obj.0.to_vec(), g.clone());
            if let Some(trace) = &mut self.trace {
                trace.push(*obj);
            }
            if self.evaluations % self.config.snapshot_interval == 0 {
                self.pending.push((self.evaluations, self.archive.front()));
            }
        }
        genotypes.into_iter().zip(objectives).collect()
    }

    /// Marks the end of a generation; pending snapshots take `population` as
    /// their population.
    pub fn commit(&mut self, population: &[ObjectiveVector]) {
        for (eval_count, archive) in std::mem::take(&mut self.pending) {
            let snapshot = Snapshot {
                eval_count,
                archive,
                population_objectives: population.to_vec(),
            };
            if self.failed.is_none() {
                if let Err(e) = self.sink.snapshot(&snapshot) {
                    self.failed = Some(e);
                }
            }
            self.last = Some(snapshot);
        }
    }
}

/// Runs `config.algorithm` on `problem`, keeping every snapshot in memory.
pub fn run(problem: &Problem, config: &RunConfig) -> Result<RunResult> {
    run_with(problem, config, RunOptions::default())
}

pub fn run_with(problem: &Problem, config: &RunConfig, options: RunOptions) -> Result<RunResult> {
    let mut snapshots = Vec::new();
    let mut result = run_streaming(problem, config, options, &mut snapshots)?;
    result.snapshots = snapshots;
    Ok(result)
}

/// Runs and hands snapshots to `sink` as they occur.
pub fn run_streaming(problem: &Problem, config: &RunConfig, options: RunOptions, sink: &mut dyn SnapshotSink) -> Result<RunResult> {
    config.validate()?;
    let started = Instant::now();
    let mut search = Search {
        problem,
        config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        evaluations: 0,
        archive: Archive::new(),
        pending: Vec::new(),
        last: None,
        sink,
        trace: options.trace.then(Vec::new),
        failed: None,
    };
    match config.algorithm {
        Algorithm::Nsga2 => nsga2::optimize(&mut search),
        Algorithm::OmopsoStyle => omopso::optimize(&mut search),
        Algorithm::Gde3Style => gde3::optimize(&mut search),
        Algorithm::Random => random::optimize(&mut search),
    }
    search.commit(&[]);
    if let Some(e) = search.failed.take() {
        return Err(e);
    }
    debug_assert_eq!(search.evaluations, config.max_evaluations);

    let final_front = search
        .archive
        .entries()
        .iter()
        .map(|(_, g)| {
            let solution = problem.decode(g);
            FrontMember {
                objectives: problem.evaluate(g, config.aggregation),
                solution,
            }
        })
        .collect();
    Ok(RunResult {
        config: config.clone(),
        snapshots: search.last.into_iter().collect(),
        final_front,
        evaluations: search.evaluations,
        wall_time: started.elapsed().as_secs_f64(),
        trace: search.trace,
    })
}
