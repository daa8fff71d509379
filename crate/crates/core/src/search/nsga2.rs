//! NSGA-II: rank-and-crowding survival with SBX and polynomial mutation.

use rand::Rng;

use super::encoding::Genotype;
use super::operators::{mutate_in_place, sbx_crossover};
use super::run::Search;
use crate::objectives::ObjectiveVector;
use crate::pareto::{crowding_distance, nondominated_sort};

#[derive(Debug, Clone)]
pub(crate) struct Individual {
    pub genotype: Genotype,
    pub objectives: ObjectiveVector,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn new((genotype, objectives): (Genotype, ObjectiveVector)) -> Self {
        Individual {
            genotype,
            objectives,
            rank: usize::MAX,
            crowding: 0.0,
        }
    }
}

pub(crate) fn objectives_of(population: &[Individual]) -> Vec<ObjectiveVector> {
    population.iter().map(|i| i.objectives).collect()
}

/// Keeps the best `size` individuals by rank, then by crowding distance, and
/// records rank and crowding on the survivors.
pub(crate) fn truncate(mut pool: Vec<Individual>, size: usize) -> Vec<Individual> {
    let points: Vec<&[f64]> = pool.iter().map(|i| i.objectives.as_slice()).collect();
    let fronts = nondominated_sort(&points);
    let mut scores = vec![(0, 0.0); pool.len()];
    for (rank, front) in fronts.iter().enumerate() {
        let crowding = crowding_distance(&points, front);
        for (&i, c) in front.iter().zip(crowding) {
            scores[i] = (rank, c);
        }
    }
    drop(points);
    for (ind, (rank, crowding)) in pool.iter_mut().zip(scores) {
        ind.rank = rank;
        ind.crowding = crowding;
    }
    let mut keep = Vec::with_capacity(size);
    for front in fronts {
        if keep.len() + front.len() <= size {
            keep.extend(front);
        } else {
            let mut rest = front;
            rest.sort_by(|&a, &b| pool[b].crowding.total_cmp(&pool[a].crowding).then(a.cmp(&b)));
            rest.truncate(size - keep.len());
            keep.extend(rest);
        }
        if keep.len() == size {
            break;
        }
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    keep.into_iter().map(|i| slots[i].take().expect("index kept twice")).collect()
}

fn tournament<'p, R: Rng>(population: &'p [Individual], rng: &mut R) -> &'p Individual {
    let a = &population[rng.random_range(0..population.len())];
    let b = &population[rng.random_range(0..population.len())];
    if a.rank != b.rank {
        return if a.rank < b.rank { a } else { b };
    }
    if a.crowding != b.crowding {
        return if a.crowding > b.crowding { a } else { b };
    }
    if rng.random::<bool>() {
        a
    } else {
        b
    }
}

pub(crate) fn optimize(search: &mut Search<'_>) {
    let config = search.config;
    let size = config.population;
    let initial = search
        .problem
        .initial_population(size, config.mutation_rate, config.mutation_di, &mut search.rng);
    let evaluated = search.evaluate(initial);
    let mut population = truncate(evaluated.into_iter().map(Individual::new).collect(), size);
    search.commit(&objectives_of(&population));

    while search.remaining() > 0 {
        let wanted = size.min(search.remaining());
        let mut offspring = Vec::with_capacity(wanted + 1);
        while offspring.len() < wanted {
            let p1 = tournament(&population, &mut search.rng).genotype.clone();
            let p2 = tournament(&population, &mut search.rng).genotype.clone();
            let (mut c1, mut c2) = sbx_crossover(&p1, &p2, config.crossover_rate, config.crossover_di, &mut search.rng);
            mutate_in_place(&mut c1, config.mutation_rate, config.mutation_di, &mut search.rng);
            mutate_in_place(&mut c2, config.mutation_rate, config.mutation_di, &mut search.rng);
            offspring.push(c1);
            offspring.push(c2);
        }
        offspring.truncate(wanted);
        let evaluated = search.evaluate(offspring);
        let mut pool = population;
        pool.extend(evaluated.into_iter().map(Individual::new));
        population = truncate(pool, size);
        search.commit(&objectives_of(&population));
    }
}
