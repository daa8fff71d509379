use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bind_pins, ConceptualModel, DependencyGraph, LayerStyle, Pin};
use crate::search::{FreezeMask, InitPolicy, Problem};

/// Reconstruction scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioId {
    /// Four transient layers, everything free.
    #[default]
    Transient4,
    /// Four strict layers, everything free.
    Strict4,
    /// Four strict layers; packages mounted into random layers per seed and
    /// units starting from the system's own package mapping.
    Strict4Mounted,
    /// The supplied model as-is, nothing frozen.
    Model,
}

impl ScenarioId {
    pub const STANDARD: [ScenarioId; 3] = [ScenarioId::Transient4, ScenarioId::Strict4, ScenarioId::Strict4Mounted];

    pub fn id(self) -> &'static str {
        match self {
            ScenarioId::Transient4 => "transient4",
            ScenarioId::Strict4 => "strict4",
            ScenarioId::Strict4Mounted => "strict4_mounted",
            ScenarioId::Model => "model",
        }
    }

    pub fn style(self) -> Option<LayerStyle> {
        match self {
            ScenarioId::Transient4 => Some(LayerStyle::Transient),
            ScenarioId::Strict4 | ScenarioId::Strict4Mounted => Some(LayerStyle::Strict),
            ScenarioId::Model => None,
        }
    }

    pub fn init_policy(self) -> InitPolicy {
        match self {
            ScenarioId::Strict4Mounted => InitPolicy::OriginalMapping,
            _ => InitPolicy::Random,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [ScenarioId::Transient4, ScenarioId::Strict4, ScenarioId::Strict4Mounted, ScenarioId::Model]
            .into_iter()
            .find(|id| id.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

pub const SCENARIO_LAYERS: usize = 4;

/// The scenario's target model derived from a base model: four layers in the
/// scenario's style, reusing the base layer names when it has four.
pub fn scenario_model(id: ScenarioId, base: &ConceptualModel) -> Result<ConceptualModel> {
    let Some(style) = id.style() else {
        return Ok(base.clone());
    };
    let names = if base.layer_count() == SCENARIO_LAYERS {
        base.layer_names.clone()
    } else {
        (0..SCENARIO_LAYERS).map(|i| format!("layer{i}")).collect()
    };
    ConceptualModel::new(style, names, base.package_slots)
}

/// Package-to-layer mounting for a mounted scenario seed. Pinned packages keep
/// their pinned layer.
pub fn mounting(seed: u64, slots: usize, layers: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    (0..slots).map(|_| rng.random_range(0..layers)).collect()
}

/// Binds a problem for `(scenario, seed)`.
pub fn build_problem(
    id: ScenarioId,
    graph: Arc<DependencyGraph>,
    base_model: &ConceptualModel,
    pins: &[Pin],
    seed: u64,
) -> Result<Problem> {
    let model = scenario_model(id, base_model)?;
    let table = bind_pins(pins, &graph, &model)?;
    let problem = Problem::new(graph, model, table)?.with_init(id.init_policy());
    if id == ScenarioId::Strict4Mounted {
        let mut layers = mounting(seed, problem.slots(), problem.layers());
        for (&k, &l) in problem.pins().package_layers() {
            layers[k] = l;
        }
        problem.with_freeze(FreezeMask::packages(layers))
    } else {
        Ok(problem)
    }
}
