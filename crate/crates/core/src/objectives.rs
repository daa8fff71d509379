//! The eight architecture-design objectives.
//!
//! Every objective is reported in canonical form: lower is better. Cohesion is
//! negated and NCCD is reported as its distance from 1.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::graph::{package_graph, ArchitectureSolution, ConceptualModel, DependencyGraph, PackageGraph};

pub const OBJECTIVE_COUNT: usize = 8;

/// Canonical objective names, in vector order.
pub const OBJECTIVE_NAMES: [&str; OBJECTIVE_COUNT] = [
    "neg_cohesion",
    "nccd_deviation",
    "efferent",
    "afferent",
    "distance",
    "violations",
    "cyclic_edges",
    "size_range",
];

pub const NEG_COHESION: usize = 0;
pub const NCCD_DEVIATION: usize = 1;
pub const EFFERENT: usize = 2;
pub const AFFERENT: usize = 3;
pub const DISTANCE: usize = 4;
pub const VIOLATIONS: usize = 5;
pub const CYCLIC_EDGES: usize = 6;
pub const SIZE_RANGE: usize = 7;

/// Looks up an objective index by canonical name.
pub fn objective_index(name: &str) -> Option<usize> {
    OBJECTIVE_NAMES.iter().position(|&n| n == name)
}

/// How per-package measures combine into one objective value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Mean,
    Sum,
}

impl Aggregation {
    fn combine(self, values: impl Iterator<Item = f64>) -> f64 {
        let (mut total, mut n) = (0.0, 0usize);
        for v in values {
            total += v;
            n += 1;
        }
        match self {
            Aggregation::Sum => total,
            Aggregation::Mean if n == 0 => 0.0,
            Aggregation::Mean => total / n as f64,
        }
    }
}

/// Eight canonical (minimized) objective values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(pub [f64; OBJECTIVE_COUNT]);

impl ObjectiveVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for ObjectiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}={v:.4}", OBJECTIVE_NAMES[i])?;
        }
        write!(f, "]")
    }
}

/// Per-package structure shared by several objectives.
#[derive(Debug, Clone, PartialEq)]
pub struct PackageStats {
    pub size: Vec<usize>,
    pub abstract_units: Vec<usize>,
    pub internal_edges: Vec<usize>,
}

impl PackageStats {
    pub fn new(graph: &DependencyGraph, sol: &ArchitectureSolution) -> Self {
        let slots = sol.package_count();
        let mut size = vec![0; slots];
        let mut abstract_units = vec![0; slots];
        let mut internal_edges = vec![0; slots];
        for (u, &k) in sol.unit_to_package.iter().enumerate() {
            size[k] += 1;
            if graph.node(u).is_abstract {
                abstract_units[k] += 1;
            }
        }
        for &(from, to) in graph.edges() {
            let k = sol.unit_to_package[from];
            if k == sol.unit_to_package[to] {
                internal_edges[k] += 1;
            }
        }
        PackageStats {
            size,
            abstract_units,
            internal_edges,
        }
    }

    /// Relational cohesion `(R + 1) / N` of a non-empty package.
    pub fn cohesion(&self, package: usize) -> f64 {
        (self.internal_edges[package] + 1) as f64 / self.size[package] as f64
    }

    pub fn abstractness(&self, package: usize) -> f64 {
        self.abstract_units[package] as f64 / self.size[package] as f64
    }
}

/// Relational cohesion aggregated over non-empty packages (higher is better).
pub fn relational_cohesion(graph: &DependencyGraph, sol: &ArchitectureSolution, aggregation: Aggregation) -> f64 {
    let stats = PackageStats::new(graph, sol);
    cohesion_from_stats(&stats, aggregation)
}

fn cohesion_from_stats(stats: &PackageStats, aggregation: Aggregation) -> f64 {
    aggregation.combine(
        (0..stats.size.len())
            .filter(|&k| stats.size[k] > 0)
            .map(|k| stats.cohesion(k)),
    )
}

/// CCD of a balanced binary tree with `n` nodes.
pub fn balanced_ccd(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0) * (n + 1.0).log2() - n
}

/// Reachable-set size of every node, counting the node itself.
pub fn reach_counts(pg: &PackageGraph) -> Vec<usize> {
    let n = pg.node_count();
    let mut counts = Vec::with_capacity(n);
    let mut seen = vec![usize::MAX; n];
    let mut stack = Vec::new();
    for start in 0..n {
        let mut count = 0;
        seen[start] = start;
        stack.push(start);
        while let Some(v) = stack.pop() {
            count += 1;
            for &w in &pg.successors[v] {
                if seen[w] != start {
                    seen[w] = start;
                    stack.push(w);
                }
            }
        }
        counts.push(count);
    }
    counts
}

/// Cumulative component dependency.
pub fn ccd(pg: &PackageGraph) -> usize {
    reach_counts(pg).into_iter().sum()
}

/// Normalised cumulative component dependency; 1.0 for a balanced binary tree.
pub fn nccd(pg: &PackageGraph) -> f64 {
    ccd(pg) as f64 / balanced_ccd(pg.node_count().max(1))
}

/// Efferent couplings per package-graph node.
pub fn efferent_counts(pg: &PackageGraph) -> Vec<usize> {
    pg.successors.iter().map(Vec::len).collect()
}

/// Afferent couplings per package-graph node.
pub fn afferent_counts(pg: &PackageGraph) -> Vec<usize> {
    let mut ca = vec![0; pg.node_count()];
    for succ in &pg.successors {
        for &j in succ {
            ca[j] += 1;
        }
    }
    ca
}

pub fn efferent_coupling(pg: &PackageGraph, aggregation: Aggregation) -> f64 {
    aggregation.combine(efferent_counts(pg).into_iter().map(|c| c as f64))
}

pub fn afferent_coupling(pg: &PackageGraph, aggregation: Aggregation) -> f64 {
    aggregation.combine(afferent_counts(pg).into_iter().map(|c| c as f64))
}

/// Distance of each coupled package from the main sequence, keyed by package
/// graph node. Uncoupled packages yield `None`.
pub fn package_distances(stats: &PackageStats, pg: &PackageGraph) -> Vec<Option<f64>> {
    let ce = efferent_counts(pg);
    let ca = afferent_counts(pg);
    pg.packages
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let coupled = ce[i] + ca[i];
            (coupled > 0).then(|| {
                let instability = ce[i] as f64 / coupled as f64;
                (stats.abstractness(k) + instability - 1.0).abs()
            })
        })
        .collect()
}

/// Mean (or sum) distance from the main sequence over coupled packages.
pub fn distance(graph: &DependencyGraph, pg: &PackageGraph, sol: &ArchitectureSolution, aggregation: Aggregation) -> f64 {
    let stats = PackageStats::new(graph, sol);
    aggregation.combine(package_distances(&stats, pg).into_iter().flatten())
}

/// Type edges that cross layers against the model's access rule.
pub fn forbidden_edges<'g>(
    graph: &'g DependencyGraph,
    sol: &'g ArchitectureSolution,
    model: &'g ConceptualModel,
) -> impl Iterator<Item = (usize, usize)> + 'g {
    graph
        .edges()
        .iter()
        .copied()
        .filter(move |&(u, v)| !model.allowed(sol.layer_of_unit(u), sol.layer_of_unit(v)))
}

pub fn forbidden_dependencies(graph: &DependencyGraph, sol: &ArchitectureSolution, model: &ConceptualModel) -> usize {
    forbidden_edges(graph, sol, model).count()
}

/// Strongly connected components (Tarjan), as a component id per node.
pub fn strongly_connected_components(pg: &PackageGraph) -> Vec<usize> {
    const UNVISITED: usize = usize::MAX;
    let n = pg.node_count();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut component = vec![UNVISITED; n];
    let mut stack = Vec::new();
    let mut next_index = 0;
    let mut next_component = 0;
    // (node, next successor position)
    let mut call = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos == 0 && index[v] == UNVISITED {
                index[v] = next_index;
                low[v] = next_index;
                next_index += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if let Some(&w) = pg.successors[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    component[w] = next_component;
                    if w == v {
                        break;
                    }
                }
                next_component += 1;
            }
        }
    }
    component
}

/// Package edges lying inside a strongly connected component with two or more packages.
pub fn package_cycles(pg: &PackageGraph) -> usize {
    let component = strongly_connected_components(pg);
    let mut sizes = vec![0usize; pg.node_count()];
    for &c in &component {
        sizes[c] += 1;
    }
    cyclic_edges(pg, &component, &sizes).count()
}

/// Iterator over (from, to) node positions of cyclic edges.
pub fn cyclic_edges<'a>(
    pg: &'a PackageGraph,
    component: &'a [usize],
    sizes: &'a [usize],
) -> impl Iterator<Item = (usize, usize)> + 'a {
    pg.successors.iter().enumerate().flat_map(move |(i, succ)| {
        succ.iter()
            .filter(move |&&j| component[i] == component[j] && sizes[component[i]] > 1)
            .map(move |&j| (i, j))
    })
}

/// Kahn topological order, or `None` if the graph has a cycle.
pub fn topological_order(pg: &PackageGraph) -> Option<Vec<usize>> {
    let n = pg.node_count();
    let mut indegree = afferent_counts(pg);
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for &w in &pg.successors[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                ready.push(w);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Range of unit counts over all package slots, empty slots included.
pub fn size_range(sol: &ArchitectureSolution) -> usize {
    let sizes = sol.package_sizes();
    let max = sizes.iter().copied().max().unwrap_or(0);
    let min = sizes.iter().copied().min().unwrap_or(0);
    max - min
}

/// Evaluates all eight objectives with mean aggregation.
pub fn evaluate(graph: &DependencyGraph, sol: &ArchitectureSolution, model: &ConceptualModel) -> ObjectiveVector {
    evaluate_with(graph, sol, model, Aggregation::Mean)
}

pub fn evaluate_with(
    graph: &DependencyGraph,
    sol: &ArchitectureSolution,
    model: &ConceptualModel,
    aggregation: Aggregation,
) -> ObjectiveVector {
    let stats = PackageStats::new(graph, sol);
    let pg = package_graph(graph, sol);
    let nccd = nccd(&pg);
    ObjectiveVector([
        -cohesion_from_stats(&stats, aggregation),
        (nccd - 1.0).abs(),
        efferent_coupling(&pg, aggregation),
        afferent_coupling(&pg, aggregation),
        aggregation.combine(package_distances(&stats, &pg).into_iter().flatten()),
        forbidden_dependencies(graph, sol, model) as f64,
        package_cycles(&pg) as f64,
        size_range(sol) as f64,
    ])
}
