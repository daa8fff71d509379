//! Fixtures shared by the benchmarks.

use archrecon_core::harness::{make_synthetic_system, SyntheticSpec, SyntheticSystem};
use archrecon_core::{ArchitectureSolution, Front};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The 120-unit, 12-slot, 4-layer strict system used throughout the experiments.
pub fn reference_system() -> SyntheticSystem {
    make_synthetic_system(&SyntheticSpec::new(120, 12, 4, 0.05, 1)).expect("valid spec")
}

pub fn random_solutions(sys: &SyntheticSystem, n: usize, seed: u64) -> Vec<ArchitectureSolution> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slots = sys.planted.package_to_layer.len();
    let layers = sys.model.layer_count();
    (0..n)
        .map(|_| ArchitectureSolution {
            unit_to_package: (0..sys.graph.unit_count()).map(|_| rng.random_range(0..slots)).collect(),
            package_to_layer: (0..slots).map(|_| rng.random_range(0..layers)).collect(),
        })
        .collect()
}

/// Uniform points in the unit cube.
pub fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..dim).map(|_| rng.random::<f64>()).collect()).collect()
}

/// Mutually non-dominated points on the simplex `sum(x) = 1`.
pub fn simplex_front(n: usize, dim: usize, seed: u64) -> Front {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let raw: Vec<f64> = (0..dim).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
            let sum: f64 = raw.iter().sum();
            raw.iter().map(|x| x / sum).collect()
        })
        .collect();
    Front { points }
}
