//! Uniform random sampling of genotypes; only the archive carries information.

use super::run::Search;

pub(crate) fn optimize(search: &mut Search<'_>) {
    let size = search.config.population;
    while search.remaining() > 0 {
        let batch = size.min(search.remaining());
        let samples = (0..batch).map(|_| search.problem.random_genotype(&mut search.rng)).collect();
        let evaluated = search.evaluate(samples);
        let population: Vec<_> = evaluated.into_iter().map(|(_, o)| o).collect();
        search.commit(&population);
    }
}
