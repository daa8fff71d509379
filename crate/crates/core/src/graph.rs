//! Dependency graphs, conceptual layer models, pins and assignments.
//!
//! The type-level [`DependencyGraph`] is the immutable input of every search.
//! A [`ConceptualModel`] describes the target layering, and [`Pin`]s let an
//! architect fix parts of the assignment up front. [`ArchitectureSolution`]
//! is the two-level assignment (unit to package, package to layer) that the
//! search explores.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use globset::{Glob, GlobMatcher};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A compilation unit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeNode {
    pub id: usize,
    pub fq_name: String,
    pub origin_package: String,
    pub is_abstract: bool,
}

/// Type-level dependency graph with dense ids and deduplicated edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: Vec<TypeNode>,
    edges: Vec<(usize, usize)>,
    package_names: Vec<String>,
    origin_slot: Vec<usize>,
}

impl DependencyGraph {
    /// Builds a graph from nodes whose ids are exactly `0..nodes.len()` (in any
    /// order). Self-edges are dropped and parallel edges collapsed.
    pub fn new(mut nodes: Vec<TypeNode>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::parse("types", "graph must contain at least one type"));
        }
        nodes.sort_by_key(|n| n.id);
        for (expected, node) in nodes.iter().enumerate() {
            if node.id != expected {
                return Err(Error::parse(
                    format!("types (id {})", node.id),
                    format!("type ids must be unique and contiguous from 0; expected id {expected}"),
                ));
            }
            if node.fq_name.is_empty() {
                return Err(Error::parse(format!("types (id {}).name", node.id), "name must be non-empty"));
            }
            if node.origin_package.is_empty() {
                return Err(Error::parse(
                    format!("types (id {}).package", node.id),
                    "package must be non-empty",
                ));
            }
        }
        let n = nodes.len();
        let mut set = BTreeSet::new();
        for (i, (from, to)) in edges.into_iter().enumerate() {
            for id in [from, to] {
                if id >= n {
                    return Err(Error::UnknownNode {
                        id: id as u64,
                        location: format!("dependencies[{i}]"),
                    });
                }
            }
            if from != to {
                set.insert((from, to));
            }
        }
        let package_names: Vec<String> = nodes
            .iter()
            .map(|n| n.origin_package.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: HashMap<&str, usize> = package_names
            .iter()
            .enumerate()
            .map(|(i, name)| (name.as_str(), i))
            .collect();
        let origin_slot = nodes.iter().map(|n| index[n.origin_package.as_str()]).collect();
        Ok(DependencyGraph {
            nodes,
            edges: set.into_iter().collect(),
            package_names,
            origin_slot,
        })
    }

    pub fn unit_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[TypeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &TypeNode {
        &self.nodes[id]
    }

    /// Distinct edges in lexicographic order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Distinct origin package names, sorted. Position in this list is the
    /// package slot an origin package occupies.
    pub fn package_names(&self) -> &[String] {
        &self.package_names
    }

    /// Slot of the package the unit was found in.
    pub fn origin_slot(&self, unit: usize) -> usize {
        self.origin_slot[unit]
    }

    /// The system's own unit-to-package mapping, folded into `slots` slots.
    pub fn origin_mapping(&self, slots: usize) -> Vec<usize> {
        self.origin_slot.iter().map(|&s| s % slots).collect()
    }

    pub fn to_document(&self) -> GraphDocument {
        GraphDocument {
            types: self
                .nodes
                .iter()
                .map(|n| RawType {
                    id: n.id as i64,
                    name: n.fq_name.clone(),
                    package: n.origin_package.clone(),
                    is_abstract: n.is_abstract,
                })
                .collect(),
            dependencies: self
                .edges
                .iter()
                .map(|&(from, to)| RawDependency {
                    from: from as i64,
                    to: to as i64,
                })
                .collect(),
        }
    }
}

/// On-disk graph format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub types: Vec<RawType>,
    #[serde(default)]
    pub dependencies: Vec<RawDependency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawType {
    pub id: i64,
    pub name: String,
    pub package: String,
    #[serde(rename = "abstract")]
    pub is_abstract: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDependency {
    pub from: i64,
    pub to: i64,
}

fn json_location(err: &serde_json::Error) -> String {
    format!("line {}, column {}", err.line(), err.column())
}

/// Parses and validates a graph document.
pub fn parse_graph(document: &str) -> Result<DependencyGraph> {
    let doc: GraphDocument =
        serde_json::from_str(document).map_err(|e| Error::parse(json_location(&e), e.to_string()))?;
    graph_from_document(doc)
}

pub fn graph_from_document(doc: GraphDocument) -> Result<DependencyGraph> {
    let mut nodes = Vec::with_capacity(doc.types.len());
    for (i, t) in doc.types.into_iter().enumerate() {
        if t.id < 0 {
            return Err(Error::parse(format!("types[{i}].id"), "id must be non-negative"));
        }
        nodes.push(TypeNode {
            id: t.id as usize,
            fq_name: t.name,
            origin_package: t.package,
            is_abstract: t.is_abstract,
        });
    }
    let n = nodes.len() as i64;
    let mut edges = Vec::with_capacity(doc.dependencies.len());
    for (i, d) in doc.dependencies.iter().enumerate() {
        for (field, id) in [("from", d.from), ("to", d.to)] {
            if id < 0 || id >= n {
                return Err(Error::UnknownNode {
                    id: id as u64,
                    location: format!("dependencies[{i}].{field}"),
                });
            }
        }
        edges.push((d.from as usize, d.to as usize));
    }
    DependencyGraph::new(nodes, edges)
}

/// Layer access rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerStyle {
    /// A layer may use any layer below it.
    Transient,
    /// A layer may use only the layer directly below it.
    Strict,
}

/// Target layering. Layer 0 is the top; indices grow downward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptualModel {
    pub style: LayerStyle,
    pub layer_names: Vec<String>,
    /// Number of addressable packages; `None` means one per origin package.
    pub package_slots: Option<usize>,
}

impl ConceptualModel {
    pub fn new(style: LayerStyle, layer_names: Vec<String>, package_slots: Option<usize>) -> Result<Self> {
        if layer_names.len() < 2 {
            return Err(Error::parse("layers", "a conceptual model needs at least two layers"));
        }
        let mut seen = BTreeSet::new();
        for (i, name) in layer_names.iter().enumerate() {
            if !seen.insert(name.as_str()) {
                return Err(Error::parse(format!("layers[{i}]"), format!("duplicate layer name `{name}`")));
            }
        }
        if package_slots == Some(0) {
            return Err(Error::parse("package_slots", "package_slots must be positive"));
        }
        Ok(ConceptualModel {
            style,
            layer_names,
            package_slots,
        })
    }

    /// Layer model named `layer0`, `layer1`, ...
    pub fn layered(style: LayerStyle, layers: usize) -> Result<Self> {
        Self::new(style, (0..layers).map(|i| format!("layer{i}")).collect(), None)
    }

    pub fn layer_count(&self) -> usize {
        self.layer_names.len()
    }

    /// Package slot count used with `graph`.
    pub fn slots_for(&self, graph: &DependencyGraph) -> usize {
        self.package_slots.unwrap_or(graph.package_names().len())
    }

    /// Whether a unit in layer `from` may depend on a unit in layer `to`.
    #[inline]
    pub fn allowed(&self, from: usize, to: usize) -> bool {
        from == to
            || match self.style {
                LayerStyle::Transient => to > from,
                LayerStyle::Strict => to == from + 1,
            }
    }
}

/// A pre-search assignment of every type or package matching `pattern`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pin {
    pub pattern: String,
    #[serde(default, rename = "package", skip_serializing_if = "Option::is_none")]
    pub target_package: Option<usize>,
    #[serde(default, rename = "layer", skip_serializing_if = "Option::is_none")]
    pub target_layer: Option<usize>,
}

/// On-disk model format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub style: String,
    pub layers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package_slots: Option<i64>,
    #[serde(default)]
    pub pins: Vec<Pin>,
}

impl ModelDocument {
    pub fn from_model(model: &ConceptualModel, pins: &[Pin]) -> Self {
        ModelDocument {
            style: match model.style {
                LayerStyle::Transient => "transient".into(),
                LayerStyle::Strict => "strict".into(),
            },
            layers: model.layer_names.clone(),
            package_slots: model.package_slots.map(|p| p as i64),
            pins: pins.to_vec(),
        }
    }
}

/// Parses a model document into the model and its (unbound) pins.
pub fn parse_model(document: &str) -> Result<(ConceptualModel, Vec<Pin>)> {
    let doc: ModelDocument =
        serde_json::from_str(document).map_err(|e| Error::parse(json_location(&e), e.to_string()))?;
    model_from_document(doc)
}

pub fn model_from_document(doc: ModelDocument) -> Result<(ConceptualModel, Vec<Pin>)> {
    let style = match doc.style.as_str() {
        "transient" => LayerStyle::Transient,
        "strict" => LayerStyle::Strict,
        other => {
            return Err(Error::parse(
                "style",
                format!("unknown style `{other}`; expected `transient` or `strict`"),
            ))
        }
    };
    let slots = match doc.package_slots {
        None => None,
        Some(p) if p > 0 => Some(p as usize),
        Some(_) => return Err(Error::parse("package_slots", "package_slots must be positive")),
    };
    let model = ConceptualModel::new(style, doc.layers, slots)?;
    for (i, pin) in doc.pins.iter().enumerate() {
        if pin.target_package.is_none() && pin.target_layer.is_none() {
            return Err(Error::parse(format!("pins[{i}]"), "pin needs a package or a layer target"));
        }
        if pin.pattern.is_empty() {
            return Err(Error::parse(format!("pins[{i}].pattern"), "pattern must be non-empty"));
        }
    }
    Ok((model, doc.pins))
}

/// Pins resolved against a concrete graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PinTable {
    unit_package: BTreeMap<usize, usize>,
    unit_layer: BTreeMap<usize, usize>,
    package_layer: BTreeMap<usize, usize>,
}

impl PinTable {
    pub fn is_empty(&self) -> bool {
        self.unit_package.is_empty() && self.unit_layer.is_empty() && self.package_layer.is_empty()
    }

    /// Units pinned to a package.
    pub fn unit_packages(&self) -> &BTreeMap<usize, usize> {
        &self.unit_package
    }

    /// Units pinned only to a layer; their package is free but must sit in that layer.
    pub fn unit_layers(&self) -> &BTreeMap<usize, usize> {
        &self.unit_layer
    }

    pub fn package_layers(&self) -> &BTreeMap<usize, usize> {
        &self.package_layer
    }

    /// Number of pinned entries (units and packages).
    pub fn len(&self) -> usize {
        self.unit_package.len() + self.unit_layer.len() + self.package_layer.len()
    }

    /// Checks that `sol` honors every pin.
    pub fn satisfied_by(&self, sol: &ArchitectureSolution) -> bool {
        self.unit_package.iter().all(|(&u, &k)| sol.unit_to_package[u] == k)
            && self.package_layer.iter().all(|(&k, &l)| sol.package_to_layer[k] == l)
            && self.unit_layer.iter().all(|(&u, &l)| sol.layer_of_unit(u) == l)
    }

    /// Verifies that unit layer pins can be met given packages whose layer is
    /// already fixed (by pins or by an external freeze).
    pub fn check_layer_capacity(&self, fixed_layers: &[Option<usize>]) -> Result<()> {
        let required: BTreeSet<usize> = self.unit_layer.values().copied().collect();
        let covered: BTreeSet<usize> = fixed_layers.iter().flatten().copied().collect();
        let uncovered = required.difference(&covered).count();
        let free = fixed_layers.iter().filter(|f| f.is_none()).count();
        if uncovered > free {
            return Err(Error::Config(format!(
                "layer pins need {uncovered} unfixed packages but only {free} are available"
            )));
        }
        Ok(())
    }
}

struct Claims<'a> {
    pins: &'a [Pin],
    owner: BTreeMap<(u8, usize), (usize, usize)>,
}

impl Claims<'_> {
    fn claim(&mut self, kind: u8, entity: usize, target: usize, pin: usize, subject: impl Fn() -> String) -> Result<bool> {
        match self.owner.get(&(kind, entity)) {
            Some(&(other_target, other_pin)) if other_target != target => Err(Error::PinConflict {
                first: other_pin,
                first_pattern: self.pins[other_pin].pattern.clone(),
                second: pin,
                second_pattern: self.pins[pin].pattern.clone(),
                subject: subject(),
            }),
            Some(_) => Ok(false),
            None => {
                self.owner.insert((kind, entity), (target, pin));
                Ok(true)
            }
        }
    }
}

const UNIT_PACKAGE: u8 = 0;
const UNIT_LAYER: u8 = 1;
const PACKAGE_LAYER: u8 = 2;

/// Resolves pattern pins to concrete units and package slots.
///
/// A pattern selects units whose name or origin package matches it, and the
/// package slots whose origin package name matches it. Package targets apply
/// to the selected units. A layer-only pin fixes the matched package slots when
/// the pattern names packages, otherwise it constrains the matched units.
pub fn bind_pins(pins: &[Pin], graph: &DependencyGraph, model: &ConceptualModel) -> Result<PinTable> {
    let slots = model.slots_for(graph);
    let layers = model.layer_count();
    let mut claims = Claims {
        pins,
        owner: BTreeMap::new(),
    };
    let mut table = PinTable::default();

    for (index, pin) in pins.iter().enumerate() {
        if pin.target_package.is_none() && pin.target_layer.is_none() {
            return Err(Error::Config(format!("pin #{index} (`{}`) has no target", pin.pattern)));
        }
        if let Some(k) = pin.target_package {
            if k >= slots {
                return Err(Error::PinOutOfRange {
                    index,
                    pattern: pin.pattern.clone(),
                    what: format!("package {k} (slots: {slots})"),
                });
            }
        }
        if let Some(l) = pin.target_layer {
            if l >= layers {
                return Err(Error::PinOutOfRange {
                    index,
                    pattern: pin.pattern.clone(),
                    what: format!("layer {l} (layers: {layers})"),
                });
            }
        }
        let matcher = compile(&pin.pattern, index)?;
        let units: Vec<usize> = graph
            .nodes()
            .iter()
            .filter(|n| matcher.is_match(&n.fq_name) || matcher.is_match(&n.origin_package))
            .map(|n| n.id)
            .collect();
        let packages: Vec<usize> = graph
            .package_names()
            .iter()
            .enumerate()
            .filter(|(slot, name)| *slot < slots && matcher.is_match(name.as_str()))
            .map(|(slot, _)| slot)
            .collect();
        if units.is_empty() && packages.is_empty() {
            return Err(Error::UnboundPin {
                index,
                pattern: pin.pattern.clone(),
            });
        }

        match (pin.target_package, pin.target_layer) {
            (Some(k), layer) => {
                for &u in &units {
                    if claims.claim(UNIT_PACKAGE, u, k, index, || unit_subject(graph, u))? {
                        table.unit_package.insert(u, k);
                    }
                }
                if let Some(l) = layer {
                    if claims.claim(PACKAGE_LAYER, k, l, index, || format!("package {k}"))? {
                        table.package_layer.insert(k, l);
                    }
                }
            }
            (None, Some(l)) if !packages.is_empty() => {
                for &k in &packages {
                    if claims.claim(PACKAGE_LAYER, k, l, index, || format!("package {k}"))? {
                        table.package_layer.insert(k, l);
                    }
                }
            }
            (None, Some(l)) => {
                for &u in &units {
                    if claims.claim(UNIT_LAYER, u, l, index, || format!("the layer of {}", unit_subject(graph, u)))? {
                        table.unit_layer.insert(u, l);
                    }
                }
            }
            (None, None) => unreachable!(),
        }
    }

    // A unit pinned to both a package and a layer fixes that package's layer.
    let both: Vec<(usize, usize)> = table
        .unit_layer
        .iter()
        .filter(|(u, _)| table.unit_package.contains_key(u))
        .map(|(&u, &l)| (u, l))
        .collect();
    for (u, l) in both {
        let k = table.unit_package[&u];
        let pin = claims.owner[&(UNIT_LAYER, u)].1;
        if claims.claim(PACKAGE_LAYER, k, l, pin, || format!("package {k} (via {})", unit_subject(graph, u)))? {
            table.package_layer.insert(k, l);
        }
        table.unit_layer.remove(&u);
    }

    let mut fixed = vec![None; slots];
    for (&k, &l) in &table.package_layer {
        fixed[k] = Some(l);
    }
    table.check_layer_capacity(&fixed)?;
    Ok(table)
}

fn compile(pattern: &str, index: usize) -> Result<GlobMatcher> {
    Glob::new(pattern)
        .map(|g| g.compile_matcher())
        .map_err(|e| Error::parse(format!("pins[{index}].pattern"), e.to_string()))
}

fn unit_subject(graph: &DependencyGraph, u: usize) -> String {
    format!("type {} (`{}`)", u, graph.node(u).fq_name)
}

/// Two-level assignment of units to packages and packages to layers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArchitectureSolution {
    pub unit_to_package: Vec<usize>,
    pub package_to_layer: Vec<usize>,
}

impl ArchitectureSolution {
    pub fn package_count(&self) -> usize {
        self.package_to_layer.len()
    }

    #[inline]
    pub fn layer_of_unit(&self, unit: usize) -> usize {
        self.package_to_layer[self.unit_to_package[unit]]
    }

    /// Unit count per package slot, including empty slots.
    pub fn package_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.package_count()];
        for &k in &self.unit_to_package {
            sizes[k] += 1;
        }
        sizes
    }

    /// Checks totality against a graph and model shape.
    pub fn validate(&self, units: usize, slots: usize, layers: usize) -> Result<()> {
        if self.unit_to_package.len() != units || self.package_to_layer.len() != slots {
            return Err(Error::Contract(format!(
                "solution covers {} units and {} packages; expected {units} and {slots}",
                self.unit_to_package.len(),
                self.package_to_layer.len()
            )));
        }
        if let Some(k) = self.unit_to_package.iter().find(|&&k| k >= slots) {
            return Err(Error::Contract(format!("package index {k} out of range")));
        }
        if let Some(l) = self.package_to_layer.iter().find(|&&l| l >= layers) {
            return Err(Error::Contract(format!("layer index {l} out of range")));
        }
        Ok(())
    }
}

/// Package-level dependency graph over the non-empty packages of a solution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackageGraph {
    /// Package slot of each node, ascending.
    pub packages: Vec<usize>,
    /// Adjacency between node positions, each row sorted.
    pub successors: Vec<Vec<usize>>,
}

impl PackageGraph {
    pub fn node_count(&self) -> usize {
        self.packages.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Edges as (from slot, to slot) pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(i, succ)| succ.iter().map(move |&j| (i, j)))
            .map(|(i, j)| (self.packages[i], self.packages[j]))
            .collect()
    }

    /// Builds a package graph directly from node-position adjacency.
    pub fn from_adjacency(successors: Vec<Vec<usize>>) -> Self {
        let n = successors.len();
        let successors = successors
            .into_iter()
            .map(|row| row.into_iter().collect::<BTreeSet<_>>().into_iter().collect())
            .collect();
        PackageGraph {
            packages: (0..n).collect(),
            successors,
        }
    }

    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut pred = vec![Vec::new(); self.node_count()];
        for (i, succ) in self.successors.iter().enumerate() {
            for &j in succ {
                pred[j].push(i);
            }
        }
        pred
    }
}

/// Lifts type dependencies to packages under `sol`.
pub fn package_graph(graph: &DependencyGraph, sol: &ArchitectureSolution) -> PackageGraph {
    let slots = sol.package_count();
    let mut position = vec![usize::MAX; slots];
    let mut packages = Vec::new();
    for (k, size) in sol.package_sizes().into_iter().enumerate() {
        if size > 0 {
            position[k] = packages.len();
            packages.push(k);
        }
    }
    let n = packages.len();
    let mut matrix = vec![false; n * n];
    for &(from, to) in graph.edges() {
        let p = position[sol.unit_to_package[from]];
        let q = position[sol.unit_to_package[to]];
        if p != q {
            matrix[p * n + q] = true;
        }
    }
    let successors = (0..n)
        .map(|p| (0..n).filter(|&q| matrix[p * n + q]).collect())
        .collect();
    PackageGraph { packages, successors }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_types(extra: &str) -> String {
        format!(
            r#"{{"types": [
                {{"id": 0, "name": "a.A", "package": "a", "abstract": false}},
                {{"id": 1, "name": "a.B", "package": "a", "abstract": true}},
                {{"id": 2, "name": "b.C", "package": "b", "abstract": false}}
            ], "dependencies": [{extra}]}}"#
        )
    }

    #[test]
    fn self_edges_and_duplicates_are_dropped() {
        let doc = three_types(r#"{"from":0,"to":1},{"from":1,"to":2},{"from":1,"to":1},{"from":0,"to":1}"#);
        let g = parse_graph(&doc).unwrap();
        assert_eq!(g.unit_count(), 3);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.package_names(), &["a".to_string(), "b".to_string()]);
        assert_eq!(g.origin_slot(2), 1);
    }

    #[test]
    fn dangling_edge_names_the_id() {
        let err = parse_graph(&three_types(r#"{"from":0,"to":99}"#)).unwrap_err();
        match err {
            Error::UnknownNode { id, .. } => assert_eq!(id, 99),
            other => panic!("unexpected {other}"),
        }
        assert!(parse_graph(&three_types(r#"{"from":0,"to":99}"#))
            .unwrap_err()
            .to_string()
            .contains("99"));
    }

    #[test]
    fn empty_graph_is_rejected() {
        let err = parse_graph(r#"{"types": [], "dependencies": []}"#).unwrap_err();
        assert!(err.to_string().contains("graph must contain at least one type"));
    }

    #[test]
    fn malformed_graph_reports_location() {
        let err = parse_graph("{\"types\": [\n {\"id\": \"x\"}]}").unwrap_err();
        assert!(matches!(err, Error::Parse { ref location, .. } if location.contains("line 2")), "{err}");
    }

    #[test]
    fn ids_must_be_contiguous() {
        let doc = r#"{"types": [{"id": 0, "name": "a", "package": "p", "abstract": false},
                                 {"id": 2, "name": "b", "package": "p", "abstract": false}]}"#;
        assert!(matches!(parse_graph(doc), Err(Error::Parse { .. })));
    }

    #[test]
    fn parses_models() {
        let (m, pins) = parse_model(r#"{"style": "transient", "layers": ["ui","app","domain","db"]}"#).unwrap();
        assert_eq!(m.style, LayerStyle::Transient);
        assert_eq!(m.layer_count(), 4);
        assert!(pins.is_empty());

        let (m, pins) = parse_model(
            r#"{"style": "strict", "layers": ["ui","app","domain","db"],
                "pins": [{"pattern": "org.app.db.*", "layer": 3}]}"#,
        )
        .unwrap();
        assert_eq!(m.style, LayerStyle::Strict);
        assert_eq!(
            pins,
            vec![Pin {
                pattern: "org.app.db.*".into(),
                target_package: None,
                target_layer: Some(3)
            }]
        );
    }

    #[test]
    fn model_errors() {
        assert!(parse_model(r#"{"style": "circular", "layers": ["a","b"]}"#)
            .unwrap_err()
            .to_string()
            .contains("circular"));
        assert!(parse_model(r#"{"style": "strict", "layers": ["a"]}"#).is_err());
        assert!(parse_model(r#"{"style": "strict", "layers": ["a","a"]}"#).is_err());
        assert!(parse_model(r#"{"style": "strict", "layers": ["a","b"], "pins": [{"pattern": "x"}]}"#).is_err());
    }

    #[test]
    fn access_rules() {
        let t = ConceptualModel::layered(LayerStyle::Transient, 4).unwrap();
        let s = ConceptualModel::layered(LayerStyle::Strict, 4).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(t.allowed(i, j), i == j || j > i);
                assert_eq!(s.allowed(i, j), i == j || j == i + 1);
            }
        }
    }

    fn sample_graph() -> DependencyGraph {
        let mut nodes = Vec::new();
        for i in 0..8 {
            let pkg = if i < 5 { "org.app.db" } else { "org.app.ui" };
            nodes.push(TypeNode {
                id: i,
                fq_name: format!("{pkg}.T{i}"),
                origin_package: pkg.into(),
                is_abstract: false,
            });
        }
        DependencyGraph::new(nodes, [(5, 0), (6, 1)]).unwrap()
    }

    fn pin(pattern: &str, package: Option<usize>, layer: Option<usize>) -> Pin {
        Pin {
            pattern: pattern.into(),
            target_package: package,
            target_layer: layer,
        }
    }

    #[test]
    fn binds_unit_patterns() {
        let g = sample_graph();
        let m = ConceptualModel::layered(LayerStyle::Strict, 4).unwrap();
        let table = bind_pins(&[pin("org.app.db.T*", Some(1), None)], &g, &m).unwrap();
        assert_eq!(table.unit_packages().len(), 5);
        assert!(table.unit_packages().values().all(|&k| k == 1));

        assert!(bind_pins(&[], &g, &m).unwrap().is_empty());
    }

    #[test]
    fn layer_pin_on_package_name_fixes_the_slot() {
        let g = sample_graph();
        let m = ConceptualModel::layered(LayerStyle::Strict, 4).unwrap();
        let table = bind_pins(&[pin("org.app.db", None, Some(3))], &g, &m).unwrap();
        assert_eq!(table.package_layers().get(&0), Some(&3));
        assert!(table.unit_layers().is_empty());
    }

    #[test]
    fn conflicting_pins_are_rejected() {
        let g = sample_graph();
        let m = ConceptualModel::layered(LayerStyle::Strict, 4).unwrap();
        let err = bind_pins(&[pin("*.T7", Some(1), None), pin("org.app.ui.T7", Some(0), None)], &g, &m).unwrap_err();
        match err {
            Error::PinConflict { first, second, .. } => assert_eq!((first, second), (0, 1)),
            other => panic!("unexpected {other}"),
        }
        // same target twice is fine
        bind_pins(&[pin("*.T7", Some(1), None), pin("org.app.ui.T7", Some(1), None)], &g, &m).unwrap();
        // a unit-layer pin that disagrees with its package's layer
        let err = bind_pins(
            &[pin("*.T7", Some(1), Some(0)), pin("*.T6", Some(1), Some(2))],
            &g,
            &m,
        )
        .unwrap_err();
        assert!(matches!(err, Error::PinConflict { .. }));
    }

    #[test]
    fn unmatched_and_out_of_range_pins() {
        let g = sample_graph();
        let m = ConceptualModel::layered(LayerStyle::Strict, 4).unwrap();
        assert!(matches!(bind_pins(&[pin("com.none.*", Some(0), None)], &g, &m), Err(Error::UnboundPin { .. })));
        assert!(matches!(bind_pins(&[pin("*", Some(5), None)], &g, &m), Err(Error::PinOutOfRange { .. })));
        assert!(matches!(bind_pins(&[pin("*", None, Some(4))], &g, &m), Err(Error::PinOutOfRange { .. })));
    }

    fn solution(units: &[usize], layers: &[usize]) -> ArchitectureSolution {
        ArchitectureSolution {
            unit_to_package: units.to_vec(),
            package_to_layer: layers.to_vec(),
        }
    }

    #[test]
    fn package_graph_examples() {
        let g = sample_graph();
        let pg = package_graph(&g, &solution(&[0; 8], &[0, 0]));
        assert_eq!((pg.node_count(), pg.edge_count()), (1, 0));

        let nodes: Vec<TypeNode> = (0..2)
            .map(|i| TypeNode {
                id: i,
                fq_name: format!("t{i}"),
                origin_package: "p".into(),
                is_abstract: false,
            })
            .collect();
        let g2 = DependencyGraph::new(nodes, [(0, 1), (1, 0)]).unwrap();
        let pg = package_graph(&g2, &solution(&[0, 1], &[0, 0]));
        assert_eq!(pg.edges(), vec![(0, 1), (1, 0)]);

        let nodes: Vec<TypeNode> = (0..6)
            .map(|i| TypeNode {
                id: i,
                fq_name: format!("t{i}"),
                origin_package: "p".into(),
                is_abstract: false,
            })
            .collect();
        // units 0,1 in p0; 2,3 in p1; 4,5 in p2; chain through type edges
        let g3 = DependencyGraph::new(nodes, [(0, 1), (1, 2), (0, 3), (3, 5), (2, 3)]).unwrap();
        let pg = package_graph(&g3, &solution(&[0, 0, 1, 1, 2, 2], &[0, 0, 0]));
        assert_eq!(pg.edges(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn package_graph_skips_empty_slots() {
        let g = sample_graph();
        let pg = package_graph(&g, &solution(&[3, 3, 3, 3, 3, 1, 1, 1], &[0, 0, 0, 0]));
        assert_eq!(pg.packages, vec![1, 3]);
        assert_eq!(pg.edges(), vec![(1, 3)]);
    }
}
