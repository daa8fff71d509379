//! Random-key encoding of architecture assignments.
//!
//! A genotype holds one key in `[0, 1]` per unit followed by one key per
//! package slot. Keys decode by scaling and flooring; pins and frozen
//! positions override whatever the keys say.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::graph::{ArchitectureSolution, PinTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genotype(pub Vec<f64>);

impl Genotype {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn genes(&self) -> &[f64] {
        &self.0
    }

    pub fn clamp(&mut self) {
        for g in &mut self.0 {
            *g = g.clamp(0.0, 1.0);
        }
    }

    /// Keys that decode back to `sol` (the centre of each key interval).
    pub fn encoding(sol: &ArchitectureSolution, layers: usize) -> Self {
        let slots = sol.package_count() as f64;
        let layers = layers as f64;
        Genotype(
            sol.unit_to_package
                .iter()
                .map(|&k| (k as f64 + 0.5) / slots)
                .chain(sol.package_to_layer.iter().map(|&l| (l as f64 + 0.5) / layers))
                .collect(),
        )
    }
}

/// Package layers fixed outside the pin mechanism (e.g. by a scenario).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezeMask {
    /// Per package slot, the frozen layer if any. Empty means nothing frozen.
    pub package_layer: Vec<Option<usize>>,
}

impl FreezeMask {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn packages(layers: Vec<usize>) -> Self {
        FreezeMask {
            package_layer: layers.into_iter().map(Some).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.package_layer.iter().all(Option::is_none)
    }

    pub fn layer_of(&self, package: usize) -> Option<usize> {
        self.package_layer.get(package).copied().flatten()
    }

    pub fn satisfied_by(&self, sol: &ArchitectureSolution) -> bool {
        self.package_layer
            .iter()
            .enumerate()
            .all(|(k, l)| l.is_none_or(|l| sol.package_to_layer[k] == l))
    }
}

#[inline]
fn key_index(key: f64, n: usize) -> usize {
    ((key * n as f64).floor().max(0.0) as usize).min(n - 1)
}

/// Layer fixed for a package by pins or the freeze mask (pins take precedence).
pub fn fixed_layers(slots: usize, pins: &PinTable, frozen: &FreezeMask) -> Vec<Option<usize>> {
    (0..slots)
        .map(|k| pins.package_layers().get(&k).copied().or_else(|| frozen.layer_of(k)))
        .collect()
}

/// Decodes a genotype for `slots` packages and `layers` layers.
pub fn decode(genotype: &Genotype, slots: usize, layers: usize, pins: &PinTable, frozen: &FreezeMask) -> ArchitectureSolution {
    let genes = genotype.genes();
    let units = genes.len() - slots;
    let fixed = fixed_layers(slots, pins, frozen);
    let mut package_to_layer: Vec<usize> = (0..slots)
        .map(|k| fixed[k].unwrap_or_else(|| key_index(genes[units + k], layers)))
        .collect();
    let mut unit_to_package: Vec<usize> = (0..units)
        .map(|u| {
            pins.unit_packages()
                .get(&u)
                .copied()
                .unwrap_or_else(|| key_index(genes[u], slots))
        })
        .collect();

    if !pins.unit_layers().is_empty() {
        place_layer_pinned_units(genes, &mut unit_to_package, &mut package_to_layer, &fixed, pins);
    }
    ArchitectureSolution {
        unit_to_package,
        package_to_layer,
    }
}

/// Units pinned only to a layer move to a package in that layer, settling a
/// free package's layer when needed. Settles are rationed so every pinned
/// layer keeps a free package available.
fn place_layer_pinned_units(
    genes: &[f64],
    unit_to_package: &mut [usize],
    package_to_layer: &mut [usize],
    fixed: &[Option<usize>],
    pins: &PinTable,
) {
    let slots = package_to_layer.len();
    let mut settled: Vec<Option<usize>> = fixed.to_vec();
    let mut free = settled.iter().filter(|s| s.is_none()).count();
    let mut unsettled_layers: BTreeSet<usize> = pins.unit_layers().values().copied().collect();
    for l in settled.iter().flatten() {
        unsettled_layers.remove(l);
    }

    for (&u, &layer) in pins.unit_layers() {
        let decoded = unit_to_package[u];
        let layer_has_package = !unsettled_layers.contains(&layer);
        let may_settle = !layer_has_package || free > unsettled_layers.len();
        let target = match settled[decoded] {
            Some(l) if l == layer => decoded,
            None if may_settle => decoded,
            _ => {
                let candidates: Vec<usize> = if layer_has_package {
                    (0..slots).filter(|&k| settled[k] == Some(layer)).collect()
                } else {
                    (0..slots).filter(|&k| settled[k].is_none()).collect()
                };
                candidates[key_index(genes[u], candidates.len())]
            }
        };
        if settled[target].is_none() {
            settled[target] = Some(layer);
            free -= 1;
            unsettled_layers.remove(&layer);
        }
        package_to_layer[target] = layer;
        unit_to_package[u] = target;
    }
}
