use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoding::{decode, fixed_layers, FreezeMask, Genotype};
use super::operators::mutate_in_place;
use crate::error::{Error, Result};
use crate::graph::{ArchitectureSolution, ConceptualModel, DependencyGraph, PinTable};
use crate::objectives::{evaluate_with, Aggregation, ObjectiveVector};

/// How the initial population is drawn.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    #[default]
    Random,
    /// The system's own unit-to-package mapping, plus mutated copies of it.
    OriginalMapping,
}

/// A bound reconstruction problem: graph, target model, pins and frozen layers.
#[derive(Debug, Clone)]
pub struct Problem {
    graph: Arc<DependencyGraph>,
    model: ConceptualModel,
    pins: PinTable,
    frozen: FreezeMask,
    slots: usize,
    init: InitPolicy,
}

impl Problem {
    pub fn new(graph: Arc<DependencyGraph>, model: ConceptualModel, pins: PinTable) -> Result<Self> {
        let slots = model.slots_for(&graph);
        Ok(Problem {
            graph,
            model,
            pins,
            frozen: FreezeMask::none(),
            slots,
            init: InitPolicy::Random,
        })
    }

    /// Freezes package layers; pinned packages keep their pinned layer.
    pub fn with_freeze(mut self, frozen: FreezeMask) -> Result<Self> {
        if !frozen.package_layer.is_empty() && frozen.package_layer.len() != self.slots {
            return Err(Error::Config(format!(
                "freeze mask covers {} packages; problem has {}",
                frozen.package_layer.len(),
                self.slots
            )));
        }
        if let Some(l) = frozen.package_layer.iter().flatten().find(|&&l| l >= self.layers()) {
            return Err(Error::Config(format!("frozen layer {l} out of range")));
        }
        self.pins
            .check_layer_capacity(&fixed_layers(self.slots, &self.pins, &frozen))?;
        self.frozen = frozen;
        Ok(self)
    }

    pub fn with_init(mut self, init: InitPolicy) -> Self {
        self.init = init;
        self
    }

    pub fn graph(&self) -> &DependencyGraph {
        &self.graph
    }

    pub fn shared_graph(&self) -> Arc<DependencyGraph> {
        Arc::clone(&self.graph)
    }

    pub fn model(&self) -> &ConceptualModel {
        &self.model
    }

    pub fn pins(&self) -> &PinTable {
        &self.pins
    }

    pub fn frozen(&self) -> &FreezeMask {
        &self.frozen
    }

    pub fn init_policy(&self) -> InitPolicy {
        self.init
    }

    pub fn units(&self) -> usize {
        self.graph.unit_count()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn layers(&self) -> usize {
        self.model.layer_count()
    }

    pub fn genotype_len(&self) -> usize {
        self.units() + self.slots
    }

    pub fn decode(&self, g: &Genotype) -> ArchitectureSolution {
        decode(g, self.slots, self.layers(), &self.pins, &self.frozen)
    }

    pub fn evaluate(&self, g: &Genotype, aggregation: Aggregation) -> ObjectiveVector {
        evaluate_with(&self.graph, &self.decode(g), &self.model, aggregation)
    }

    /// True when every pin and frozen layer holds in `sol`.
    pub fn honors_constraints(&self, sol: &ArchitectureSolution) -> bool {
        self.pins.satisfied_by(sol) && self.frozen.satisfied_by(sol)
    }

    pub fn random_genotype<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        Genotype((0..self.genotype_len()).map(|_| rng.random::<f64>()).collect())
    }

    /// The genotype that decodes to the graph's own package mapping. Layer keys
    /// are random.
    pub fn origin_genotype<R: Rng + ?Sized>(&self, rng: &mut R) -> Genotype {
        let slots = self.slots as f64;
        let mut genes: Vec<f64> = self
            .graph
            .origin_mapping(self.slots)
            .into_iter()
            .map(|k| (k as f64 + 0.5) / slots)
            .collect();
        genes.extend((0..self.slots).map(|_| rng.random::<f64>()));
        Genotype(genes)
    }

    /// Initial population of `n` genotypes under the init policy. With the
    /// original mapping, member 0 is the mapping itself and the rest are
    /// mutated copies.
    pub fn initial_population<R: Rng + ?Sized>(&self, n: usize, mutation_rate: f64, mutation_di: f64, rng: &mut R) -> Vec<Genotype> {
        match self.init {
            InitPolicy::Random => (0..n).map(|_| self.random_genotype(rng)).collect(),
            InitPolicy::OriginalMapping => {
                let origin = self.origin_genotype(rng);
                (0..n)
                    .map(|i| {
                        let mut g = origin.clone();
                        if i > 0 {
                            mutate_in_place(&mut g, mutation_rate, mutation_di, rng);
                        }
                        g
                    })
                    .collect()
            }
        }
    }
}
