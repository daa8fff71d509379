//! GDE3-style differential evolution: DE/rand/1/bin variation with
//! dominance-based replacement and rank/crowding reduction.

use rand::Rng;

use super::encoding::Genotype;
use super::nsga2::{objectives_of, truncate, Individual};
use super::run::Search;
use crate::pareto::{compare, Dominance};

const CR: f64 = 0.5;
const F: f64 = 0.5;

fn distinct_others<R: Rng>(n: usize, exclude: usize, rng: &mut R) -> [usize; 3] {
    let mut picked = [usize::MAX; 3];
    let mut count = 0;
    while count < 3 {
        let r = rng.random_range(0..n);
        if r != exclude && !picked[..count].contains(&r) {
            picked[count] = r;
            count += 1;
        }
    }
    picked
}

pub(crate) fn optimize(search: &mut Search<'_>) {
    let config = search.config;
    let size = config.population;
    let initial = search
        .problem
        .initial_population(size, config.mutation_rate, config.mutation_di, &mut search.rng);
    let mut population: Vec<Individual> = search.evaluate(initial).into_iter().map(Individual::new).collect();
    search.commit(&objectives_of(&population));

    while search.remaining() > 0 {
        let n = population.len();
        let wanted = n.min(search.remaining());
        let trials: Vec<Genotype> = (0..wanted)
            .map(|i| {
                let [r1, r2, r3] = distinct_others(n, i, &mut search.rng);
                let (a, b, c) = (&population[r1].genotype.0, &population[r2].genotype.0, &population[r3].genotype.0);
                let x = &population[i].genotype.0;
                let forced = search.rng.random_range(0..x.len());
                Genotype(
                    (0..x.len())
                        .map(|j| {
                            if j == forced || search.rng.random::<f64>() < CR {
                                (c[j] + F * (a[j] - b[j])).clamp(0.0, 1.0)
                            } else {
                                x[j]
                            }
                        })
                        .collect(),
                )
            })
            .collect();
        let evaluated = search.evaluate(trials);

        let mut next = Vec::with_capacity(2 * n);
        let mut parents = population.into_iter();
        for trial in evaluated.into_iter().map(Individual::new) {
            let parent = parents.next().expect("one trial per parent");
            match compare(trial.objectives.as_slice(), parent.objectives.as_slice()) {
                Dominance::Dominates => next.push(trial),
                Dominance::Dominated | Dominance::Equal => next.push(parent),
                Dominance::Incomparable => {
                    next.push(parent);
                    next.push(trial);
                }
            }
        }
        next.extend(parents);
        population = if next.len() > size { truncate(next, size) } else { next };
        search.commit(&objectives_of(&population));
    }
}
