//! Synthetic systems with a planted layered decomposition.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ArchitectureSolution, ConceptualModel, DependencyGraph, LayerStyle, TypeNode};

/// Generator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub units: usize,
    pub packages: usize,
    pub layers: usize,
    /// Extra uniformly random edges, as a fraction of the planted edge count.
    pub noise: f64,
    pub seed: u64,
    pub style: LayerStyle,
    /// Probability of an edge between two units of the same package.
    pub intra_density: f64,
    /// Expected outgoing cross-package edges per unit.
    pub cross_edges_per_unit: f64,
    pub abstract_fraction: f64,
}

impl SyntheticSpec {
    pub fn new(units: usize, packages: usize, layers: usize, noise: f64, seed: u64) -> Self {
        SyntheticSpec {
            units,
            packages,
            layers,
            noise,
            seed,
            style: LayerStyle::Strict,
            intra_density: 0.3,
            cross_edges_per_unit: 1.0,
            abstract_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSystem {
    pub graph: DependencyGraph,
    pub model: ConceptualModel,
    pub planted: ArchitectureSolution,
    /// Edges added as noise on top of the planted structure.
    pub noise_edges: Vec<(usize, usize)>,
}

/// Builds a graph whose planted assignment has dense packages, package edges
/// only along allowed layer directions (acyclic), plus random noise edges.
/// Units live in their planted package, so the origin mapping is the planted one.
pub fn make_synthetic_system(spec: &SyntheticSpec) -> Result<SyntheticSystem> {
    let SyntheticSpec {
        units,
        packages,
        layers,
        noise,
        ..
    } = *spec;
    if !(units >= packages && packages >= layers && layers >= 2) {
        return Err(Error::Config(format!(
            "synthetic systems need units >= packages >= layers >= 2 (got {units}, {packages}, {layers})"
        )));
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::Config("noise must lie in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let model = ConceptualModel::new(
        spec.style,
        (0..layers).map(|i| format!("layer{i}")).collect(),
        Some(packages),
    )?;

    // contiguous blocks: every layer gets a package, every package a unit
    let package_to_layer: Vec<usize> = (0..packages).map(|k| k * layers / packages).collect();
    let unit_to_package: Vec<usize> = (0..units).map(|u| u * packages / units).collect();
    let members: Vec<Vec<usize>> = (0..packages)
        .map(|k| (0..units).filter(|&u| unit_to_package[u] == k).collect())
        .collect();

    let nodes: Vec<TypeNode> = (0..units)
        .map(|u| {
            let k = unit_to_package[u];
            let package = format!("sys.l{}.p{k:03}", package_to_layer[k]);
            TypeNode {
                id: u,
                fq_name: format!("{package}.T{u}"),
                origin_package: package,
                is_abstract: rng.random_bool(spec.abstract_fraction),
            }
        })
        .collect();

    let mut edges = BTreeSet::new();
    for group in &members {
        for &a in group {
            for &b in group {
                if a != b && rng.random_bool(spec.intra_density) {
                    edges.insert((a, b));
                }
            }
        }
    }
    // Cross-package targets: lower-numbered same-layer packages may use
    // higher-numbered ones, and any package may use an allowed lower layer.
    let targets: Vec<Vec<usize>> = (0..packages)
        .map(|p| {
            (0..packages)
                .filter(|&q| {
                    let (lp, lq) = (package_to_layer[p], package_to_layer[q]);
                    if lp == lq {
                        q > p
                    } else {
                        model.allowed(lp, lq)
                    }
                })
                .collect()
        })
        .collect();
    let whole = spec.cross_edges_per_unit.floor() as usize;
    let fraction = spec.cross_edges_per_unit - whole as f64;
    for u in 0..units {
        let options = &targets[unit_to_package[u]];
        if options.is_empty() {
            continue;
        }
        let count = whole + usize::from(rng.random_bool(fraction));
        for _ in 0..count {
            let q = options[rng.random_range(0..options.len())];
            let v = members[q][rng.random_range(0..members[q].len())];
            edges.insert((u, v));
        }
    }

    let wanted = (noise * edges.len() as f64).round() as usize;
    let capacity = units * (units - 1) - edges.len();
    let mut noise_edges = Vec::with_capacity(wanted);
    while noise_edges.len() < wanted.min(capacity) {
        let u = rng.random_range(0..units);
        let v = rng.random_range(0..units);
        if u != v && edges.insert((u, v)) {
            noise_edges.push((u, v));
        }
    }

    let graph = DependencyGraph::new(nodes, edges)?;
    Ok(SyntheticSystem {
        graph,
        model,
        planted: ArchitectureSolution {
            unit_to_package,
            package_to_layer,
        },
        noise_edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{evaluate, forbidden_dependencies, CYCLIC_EDGES, VIOLATIONS};

    #[test]
    fn noiseless_planted_solution_is_clean() {
        for seed in 0..5 {
            let sys = make_synthetic_system(&SyntheticSpec::new(120, 12, 4, 0.0, seed)).unwrap();
            let v = evaluate(&sys.graph, &sys.planted, &sys.model);
            assert_eq!(v[VIOLATIONS], 0.0);
            assert_eq!(v[CYCLIC_EDGES], 0.0);
            assert_eq!(forbidden_dependencies(&sys.graph, &sys.planted, &sys.model), 0);
            assert!(sys.noise_edges.is_empty());
        }
    }

    #[test]
    fn noise_violations_match_a_recount() {
        let sys = make_synthetic_system(&SyntheticSpec::new(120, 12, 4, 0.2, 9)).unwrap();
        assert!(!sys.noise_edges.is_empty());
        let layer = |u: usize| sys.planted.package_to_layer[sys.planted.unit_to_package[u]];
        let recount = sys
            .noise_edges
            .iter()
            .filter(|&&(u, v)| {
                let (a, b) = (layer(u), layer(v));
                !(a == b || b == a + 1)
            })
            .count();
        assert_eq!(forbidden_dependencies(&sys.graph, &sys.planted, &sys.model), recount);
    }

    #[test]
    fn origin_mapping_is_the_planted_one() {
        let sys = make_synthetic_system(&SyntheticSpec::new(50, 12, 3, 0.1, 1)).unwrap();
        assert_eq!(sys.graph.package_names().len(), 12);
        assert_eq!(sys.graph.origin_mapping(12), sys.planted.unit_to_package);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(make_synthetic_system(&SyntheticSpec::new(5, 6, 2, 0.0, 0)).is_err());
        assert!(make_synthetic_system(&SyntheticSpec::new(10, 3, 1, 0.0, 0)).is_err());
        assert!(make_synthetic_system(&SyntheticSpec::new(10, 3, 2, 1.5, 0)).is_err());
    }
}
