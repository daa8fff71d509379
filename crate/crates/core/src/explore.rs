//! Queries behind the front explorer: objective-bounds filtering, solution
//! details and constrained re-runs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{package_graph, ArchitectureSolution, Pin};
use crate::indicators::ReferenceFront;
use crate::objectives::{
    afferent_counts, cyclic_edges, efferent_counts, forbidden_edges, objective_index, package_distances,
    strongly_connected_components, ObjectiveVector, PackageStats, OBJECTIVE_COUNT, OBJECTIVE_NAMES,
};
use crate::search::{FrontMember, RunConfig};
use crate::store::{RunDefinition, RunRecord, Store};

/// `<run id>:<front index>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolutionRef {
    pub run: String,
    pub index: usize,
}

impl fmt::Display for SolutionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.run, self.index)
    }
}

impl FromStr for SolutionRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::NotFound(format!("solution `{s}`"));
        let (run, index) = s.rsplit_once(':').ok_or_else(bad)?;
        if run.is_empty() {
            return Err(bad());
        }
        Ok(SolutionRef {
            run: run.to_string(),
            index: index.parse().map_err(|_| bad())?,
        })
    }
}

impl Serialize for SolutionRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SolutionRef {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Inclusive bounds on one objective, in raw units.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl Bound {
    pub fn contains(&self, v: f64) -> bool {
        self.lower.is_none_or(|l| v >= l) && self.upper.is_none_or(|u| v <= u)
    }
}

/// Objective bounds keyed by objective name.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterQuery {
    #[serde(default)]
    pub bounds: BTreeMap<String, Bound>,
}

impl FilterQuery {
    pub fn validate(&self) -> Result<[Bound; OBJECTIVE_COUNT]> {
        let mut out = [Bound::default(); OBJECTIVE_COUNT];
        for (name, bound) in &self.bounds {
            let i = objective_index(name).ok_or_else(|| {
                Error::Config(format!("unknown objective `{name}`; expected one of {}", OBJECTIVE_NAMES.join(", ")))
            })?;
            if bound.lower.is_some_and(f64::is_nan) || bound.upper.is_some_and(f64::is_nan) {
                return Err(Error::Config(format!("bound on `{name}` is NaN")));
            }
            if let (Some(l), Some(u)) = (bound.lower, bound.upper) {
                if l > u {
                    return Err(Error::Config(format!("bound on `{name}` has lower {l} above upper {u}")));
                }
            }
            out[i] = *bound;
        }
        Ok(out)
    }

    pub fn accepts(bounds: &[Bound; OBJECTIVE_COUNT], v: &ObjectiveVector) -> bool {
        bounds.iter().zip(v.0).all(|(b, x)| b.contains(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefSolution {
    #[serde(rename = "ref")]
    pub solution: SolutionRef,
    pub objectives: ObjectiveVector,
}

/// Keeps the candidates whose objectives satisfy every bound.
pub fn filter_candidates(candidates: &[RefSolution], query: &FilterQuery) -> Result<Vec<RefSolution>> {
    let bounds = query.validate()?;
    Ok(candidates
        .iter()
        .filter(|c| FilterQuery::accepts(&bounds, &c.objectives))
        .cloned()
        .collect())
}

/// Final-front members of a run as referenced solutions.
pub fn run_solutions(store: &Store, run: &str) -> Result<Vec<RefSolution>> {
    Ok(store
        .front(run)?
        .into_iter()
        .enumerate()
        .map(|(index, m)| RefSolution {
            solution: SolutionRef {
                run: run.to_string(),
                index,
            },
            objectives: m.objectives,
        })
        .collect())
}

pub fn filter_solutions(store: &Store, run: &str, query: &FilterQuery) -> Result<Vec<RefSolution>> {
    let bounds = query.validate()?;
    Ok(run_solutions(store, run)?
        .into_iter()
        .filter(|c| FilterQuery::accepts(&bounds, &c.objectives))
        .collect())
}

/// Reference-front points resolved to the solutions that supplied them.
pub fn reference_solutions(store: &Store, reference: &ReferenceFront) -> Result<Vec<RefSolution>> {
    let mut fronts: BTreeMap<&str, Vec<FrontMember>> = BTreeMap::new();
    let mut out = Vec::with_capacity(reference.len());
    for (point, run) in reference.points.points.iter().zip(&reference.provenance) {
        if !fronts.contains_key(run.as_str()) {
            fronts.insert(run, store.front(run)?);
        }
        let index = fronts[run.as_str()]
            .iter()
            .position(|m| m.objectives.0.iter().zip(point).all(|(a, b)| (a - b).abs() <= crate::indicators::POINT_TOLERANCE))
            .ok_or_else(|| Error::Contract(format!("reference point not found in the front of run `{run}`")))?;
        out.push(RefSolution {
            solution: SolutionRef {
                run: run.clone(),
                index,
            },
            objectives: fronts[run.as_str()][index].objectives,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitAssignment {
    pub unit: usize,
    pub name: String,
    pub package: usize,
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageDetail {
    pub package: usize,
    pub layer: usize,
    pub size: usize,
    pub cohesion: f64,
    pub efferent: usize,
    pub afferent: usize,
    /// Absent for packages without package-level couplings.
    pub distance: Option<f64>,
}

/// A type edge the layer rule forbids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub from: usize,
    pub to: usize,
    pub from_name: String,
    pub to_name: String,
    pub from_layer: usize,
    pub to_layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDetail {
    #[serde(rename = "ref")]
    pub solution: SolutionRef,
    pub objectives: ObjectiveVector,
    pub layers: Vec<String>,
    pub units: Vec<UnitAssignment>,
    pub package_to_layer: Vec<usize>,
    /// Non-empty packages only.
    pub packages: Vec<PackageDetail>,
    pub violations: Vec<Violation>,
    /// Package edges inside a package cycle, as package slots.
    pub cyclic_edges: Vec<(usize, usize)>,
}

pub fn solution_detail(store: &Store, solution: &SolutionRef) -> Result<SolutionDetail> {
    let definition = store.definition(&solution.run)?;
    let front = store.front(&solution.run)?;
    let member = front
        .get(solution.index)
        .ok_or_else(|| Error::NotFound(format!("solution `{solution}`")))?;
    let problem = definition.problem()?;
    Ok(describe_solution(solution.clone(), member, &problem))
}

pub fn describe_solution(solution: SolutionRef, member: &FrontMember, problem: &crate::search::Problem) -> SolutionDetail {
    let graph = problem.graph();
    let model = problem.model();
    let sol: &ArchitectureSolution = &member.solution;
    let stats = PackageStats::new(graph, sol);
    let pg = package_graph(graph, sol);
    let ce = efferent_counts(&pg);
    let ca = afferent_counts(&pg);
    let distances = package_distances(&stats, &pg);
    let packages = pg
        .packages
        .iter()
        .enumerate()
        .map(|(i, &k)| PackageDetail {
            package: k,
            layer: sol.package_to_layer[k],
            size: stats.size[k],
            cohesion: stats.cohesion(k),
            efferent: ce[i],
            afferent: ca[i],
            distance: distances[i],
        })
        .collect();
    let violations = forbidden_edges(graph, sol, model)
        .map(|(u, v)| Violation {
            from: graph.node(u).id,
            to: graph.node(v).id,
            from_name: graph.node(u).fq_name.clone(),
            to_name: graph.node(v).fq_name.clone(),
            from_layer: sol.layer_of_unit(u),
            to_layer: sol.layer_of_unit(v),
        })
        .collect();
    let component = strongly_connected_components(&pg);
    let mut sizes = vec![0usize; pg.node_count()];
    for &c in &component {
        sizes[c] += 1;
    }
    let cyclic = cyclic_edges(&pg, &component, &sizes)
        .map(|(i, j)| (pg.packages[i], pg.packages[j]))
        .collect();
    SolutionDetail {
        solution,
        objectives: member.objectives,
        layers: model.layer_names.clone(),
        units: (0..graph.unit_count())
            .map(|u| UnitAssignment {
                unit: graph.node(u).id,
                name: graph.node(u).fq_name.clone(),
                package: sol.unit_to_package[u],
                layer: sol.layer_of_unit(u),
            })
            .collect(),
        package_to_layer: sol.package_to_layer.clone(),
        packages,
        violations,
        cyclic_edges: cyclic,
    }
}

/// Extra pins and config field overrides for a re-run of an existing run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstrainRequest {
    #[serde(default)]
    pub pins: Vec<Pin>,
    /// Config fields to replace, e.g. `{"seed": 3}`.
    #[serde(default)]
    pub overrides: serde_json::Map<String, serde_json::Value>,
}

/// The definition of a re-run of `base` with extra pins and overrides. Fails
/// without side effects when the pins conflict or the config is invalid.
pub fn constrained_definition(store: &Store, base: &str, request: &ConstrainRequest) -> Result<RunDefinition> {
    if request.pins.is_empty() && request.overrides.is_empty() {
        return Err(Error::Config("nothing to constrain".into()));
    }
    let mut definition = store.definition(base)?;
    let mut config = serde_json::to_value(&definition.config)?;
    let fields = config.as_object_mut().expect("configs serialize as objects");
    for (k, v) in &request.overrides {
        fields.insert(k.clone(), v.clone());
    }
    let config: RunConfig = serde_json::from_value(config).map_err(|e| Error::Config(e.to_string()))?;
    config.validate()?;
    definition.config = config;
    definition.model.pins.extend(request.pins.iter().cloned());
    // binds the pins and checks them against each other
    definition.problem()?;
    Ok(definition)
}

/// Enqueues the constrained re-run; the caller executes it.
pub fn launch_constrained_run(store: &Store, base: &str, request: &ConstrainRequest) -> Result<(RunRecord, RunDefinition)> {
    let definition = constrained_definition(store, base, request)?;
    Ok((store.enqueue(&definition)?, definition))
}
