//! OMOPSO-style particle swarm.
//!
//! Particles fly through genotype space guided by their personal best and a
//! leader drawn from an epsilon-dominance archive. Two thirds of the swarm
//! receive polynomial-mutation turbulence every iteration.

use rand::Rng;

use super::encoding::Genotype;
use super::operators::mutate_in_place;
use super::run::Search;
use crate::objectives::{ObjectiveVector, OBJECTIVE_COUNT};
use crate::pareto::{crowding_distance, dominates};

/// Leaders under additive epsilon dominance on scaled objectives, capped by
/// crowding distance.
#[derive(Debug, Clone)]
pub(crate) struct LeaderArchive {
    members: Vec<(Genotype, ObjectiveVector)>,
    margin: [f64; OBJECTIVE_COUNT],
    capacity: usize,
    crowding: Vec<f64>,
}

impl LeaderArchive {
    /// `scale` gives each axis's extent; the epsilon applies to scaled values.
    pub fn new(epsilon: f64, scale: [f64; OBJECTIVE_COUNT], capacity: usize) -> Self {
        LeaderArchive {
            members: Vec::new(),
            margin: scale.map(|s| epsilon * s),
            capacity,
            crowding: Vec::new(),
        }
    }

    fn eps_covers(&self, a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
        (0..OBJECTIVE_COUNT).all(|k| a[k] - self.margin[k] <= b[k])
    }

    pub fn insert(&mut self, genotype: &Genotype, objectives: ObjectiveVector) -> bool {
        let point = objectives.as_slice();
        let dominates_some = self.members.iter().any(|(_, m)| dominates(point, m.as_slice()));
        if dominates_some {
            self.members.retain(|(_, m)| !dominates(point, m.as_slice()));
        } else if self.members.iter().any(|(_, m)| self.eps_covers(m, &objectives)) {
            return false;
        }
        self.members.push((genotype.clone(), objectives));
        if self.members.len() > self.capacity {
            let points: Vec<&[f64]> = self.members.iter().map(|(_, o)| o.as_slice()).collect();
            let all: Vec<usize> = (0..points.len()).collect();
            let crowding = crowding_distance(&points, &all);
            let worst = (0..crowding.len())
                .min_by(|&a, &b| crowding[a].total_cmp(&crowding[b]).then(b.cmp(&a)))
                .expect("archive is non-empty");
            self.members.remove(worst);
        }
        true
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn refresh_crowding(&mut self) {
        let points: Vec<&[f64]> = self.members.iter().map(|(_, o)| o.as_slice()).collect();
        let all: Vec<usize> = (0..points.len()).collect();
        self.crowding = crowding_distance(&points, &all);
    }

    /// Binary tournament on crowding distance.
    pub fn select<R: Rng>(&self, rng: &mut R) -> &Genotype {
        let a = rng.random_range(0..self.members.len());
        let b = rng.random_range(0..self.members.len());
        let pick = match (self.crowding.get(a), self.crowding.get(b)) {
            (Some(ca), Some(cb)) if cb > ca => b,
            _ => a,
        };
        &self.members[pick].0
    }
}

fn axis_scale(objectives: &[ObjectiveVector]) -> [f64; OBJECTIVE_COUNT] {
    let mut scale = [1.0; OBJECTIVE_COUNT];
    for (k, s) in scale.iter_mut().enumerate() {
        let lo = objectives.iter().map(|o| o[k]).fold(f64::INFINITY, f64::min);
        let hi = objectives.iter().map(|o| o[k]).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            *s = hi - lo;
        }
    }
    scale
}

pub(crate) fn optimize(search: &mut Search<'_>) {
    let config = search.config;
    let size = config.population;
    let initial = search
        .problem
        .initial_population(size, config.mutation_rate, config.mutation_di, &mut search.rng);
    let evaluated = search.evaluate(initial);
    let objectives: Vec<ObjectiveVector> = evaluated.iter().map(|(_, o)| *o).collect();
    let mut leaders = LeaderArchive::new(config.epsilon, axis_scale(&objectives), size);
    for (g, o) in &evaluated {
        leaders.insert(g, *o);
    }
    let dim = search.problem.genotype_len();
    let mut positions: Vec<Genotype> = evaluated.iter().map(|(g, _)| g.clone()).collect();
    let mut current = objectives;
    let mut velocity = vec![vec![0.0; dim]; positions.len()];
    let mut best: Vec<(Genotype, ObjectiveVector)> = evaluated;
    search.commit(&current);

    while search.remaining() > 0 {
        leaders.refresh_crowding();
        let moving = positions.len().min(search.remaining());
        let mut moved = Vec::with_capacity(moving);
        for i in 0..moving {
            let rng = &mut search.rng;
            let leader = leaders.select(rng).clone();
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let c1 = rng.random_range(1.5..=2.0);
            let c2 = rng.random_range(1.5..=2.0);
            let w = rng.random_range(0.1..=0.5);
            let x = &mut positions[i].0;
            let v = &mut velocity[i];
            let own_best = &best[i].0 .0;
            for j in 0..dim {
                v[j] = w * v[j] + c1 * r1 * (own_best[j] - x[j]) + c2 * r2 * (leader.0[j] - x[j]);
                x[j] += v[j];
                if x[j] < 0.0 {
                    x[j] = 0.0;
                    v[j] = -v[j];
                } else if x[j] > 1.0 {
                    x[j] = 1.0;
                    v[j] = -v[j];
                }
            }
            if i % 3 != 2 {
                mutate_in_place(&mut positions[i], config.mutation_rate, config.mutation_di, rng);
            }
            moved.push(positions[i].clone());
        }
        let evaluated = search.evaluate(moved);
        for (i, (g, o)) in evaluated.into_iter().enumerate() {
            leaders.insert(&g, o);
            if !dominates(best[i].1.as_slice(), o.as_slice()) {
                best[i] = (g, o);
            }
            current[i] = o;
        }
        search.commit(&current);
    }
}
