//! Pareto dominance, non-dominated filtering and fronts.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `a` dominates `b` under minimization: no worse anywhere, better somewhere.
#[inline]
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Relation between two objective vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    Dominates,
    Dominated,
    Equal,
    Incomparable,
}

#[inline]
pub fn compare(a: &[f64], b: &[f64]) -> Dominance {
    let (mut better, mut worse) = (false, false);
    for (x, y) in a.iter().zip(b) {
        if x < y {
            better = true;
        } else if x > y {
            worse = true;
        }
        if better && worse {
            return Dominance::Incomparable;
        }
    }
    match (better, worse) {
        (true, false) => Dominance::Dominates,
        (false, true) => Dominance::Dominated,
        (false, false) => Dominance::Equal,
        (true, true) => Dominance::Incomparable,
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Indices of the non-dominated points, first occurrence kept among duplicates,
/// in input order.
pub fn nondominated_indices<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<usize>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let dim = first.as_ref().len();
    if let Some(bad) = points.iter().position(|p| p.as_ref().len() != dim) {
        return Err(Error::Contract(format!(
            "point {bad} has dimension {}, expected {dim}",
            points[bad].as_ref().len()
        )));
    }
    // dominators sort lexicographically first
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lexicographic(points[i].as_ref(), points[j].as_ref()).then(i.cmp(&j)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let p = points[i].as_ref();
        let covered = kept.iter().any(|&k| {
            let q = points[k].as_ref();
            q == p || dominates(q, p)
        });
        if !covered {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    Ok(kept)
}

/// Non-dominated subset of `points`, duplicates collapsed.
pub fn nondominated_filter(points: &[Vec<f64>]) -> Result<Front> {
    let keep = nondominated_indices(points)?;
    Ok(Front {
        points: keep.into_iter().map(|i| points[i].clone()).collect(),
    })
}

/// A set of mutually non-dominated objective vectors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Front {
    pub points: Vec<Vec<f64>>,
}

impl Front {
    /// Filters arbitrary points down to a front.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        nondominated_filter(&points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }

    /// Checks mutual non-dominance and absence of duplicates.
    pub fn is_valid(&self) -> bool {
        self.points.iter().enumerate().all(|(i, p)| {
            self.points
                .iter()
                .enumerate()
                .all(|(j, q)| i == j || (p != q && !dominates(q, p)))
        })
    }
}

/// Unbounded archive of non-dominated entries with attached payloads.
#[derive(Debug, Clone)]
pub struct Archive<T> {
    entries: Vec<(Vec<f64>, T)>,
}

impl<T> Default for Archive<T> {
    fn default() -> Self {
        Archive { entries: Vec::new() }
    }
}

impl<T> Archive<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `point` unless an existing entry dominates or equals it; evicts
    /// entries it dominates. Returns whether the point was added.
    pub fn insert(&mut self, point: Vec<f64>, payload: T) -> bool {
        for (q, _) in &self.entries {
            match compare(q, &point) {
                Dominance::Dominates | Dominance::Equal => return false,
                _ => {}
            }
        }
        self.entries.retain(|(q, _)| !dominates(&point, q));
        self.entries.push((point, payload));
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(Vec<f64>, T)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(Vec<f64>, T)> {
        self.entries
    }

    pub fn front(&self) -> Front {
        Front {
            points: self.entries.iter().map(|(p, _)| p.clone()).collect(),
        }
    }
}

/// Fast non-dominated sorting; returns fronts of indices, best first.
pub fn nondominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_count = vec![0usize; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            match compare(points[i].as_ref(), points[j].as_ref()) {
                Dominance::Dominates => {
                    dominates_list[i].push(j);
                    dominated_by_count[j] += 1;
                }
                Dominance::Dominated => {
                    dominates_list[j].push(i);
                    dominated_by_count[i] += 1;
                }
                _ => {}
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| dominated_by_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by_count[j] -= 1;
                if dominated_by_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// Crowding distance of each member of `members` (indices into `points`).
pub fn crowding_distance<P: AsRef<[f64]>>(points: &[P], members: &[usize]) -> Vec<f64> {
    let n = members.len();
    let mut distance = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let dim = points[members[0]].as_ref().len();
    let mut order: Vec<usize> = (0..n).collect();
    for axis in 0..dim {
        let value = |pos: usize| points[members[pos]].as_ref()[axis];
        order.sort_by(|&a, &b| value(a).total_cmp(&value(b)).then(a.cmp(&b)));
        let lo = value(order[0]);
        let hi = value(order[n - 1]);
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        if hi - lo <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            distance[order[w]] += (value(order[w + 1]) - value(order[w - 1])) / (hi - lo);
        }
    }
    distance
}
