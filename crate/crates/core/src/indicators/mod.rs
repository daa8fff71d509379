//! Reference fronts, objective-space normalization and front-quality indicators.

mod hypervolume;

pub use hypervolume::{
    hypervolume, hypervolume_exact, hypervolume_monte_carlo, EXACT_MAX_DIMENSION, MONTE_CARLO_SAMPLES,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::pareto::Front;
use crate::pareto::nondominated_indices;

/// Tolerance for treating two points as the same point.
pub const POINT_TOLERANCE: f64 = 1e-9;

/// Default hypervolume reference coordinate in normalized space.
pub const DEFAULT_REFERENCE_COORDINATE: f64 = 1.1;

fn same_point(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= POINT_TOLERANCE)
}

/// Super-front of several runs, each point credited to one contributing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFront {
    pub points: Front,
    /// Contributing run of each point, parallel to `points`.
    pub provenance: Vec<String>,
    /// Every run that went into the front, sorted.
    pub inputs: Vec<String>,
}

impl ReferenceFront {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Union of `fronts` filtered to its non-dominated points. Points supplied by
/// several runs are credited to the lowest run id.
pub fn build_reference_front(fronts: &[(String, Front)]) -> Result<ReferenceFront> {
    let mut order: Vec<usize> = (0..fronts.len()).collect();
    order.sort_by(|&a, &b| fronts[a].0.cmp(&fronts[b].0).then(a.cmp(&b)));
    let mut union: Vec<&[f64]> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for &i in &order {
        for p in &fronts[i].1.points {
            union.push(p);
            owner.push(i);
        }
    }
    if let Some(first) = union.first() {
        let dim = first.len();
        if union.iter().any(|p| p.len() != dim) {
            return Err(Error::Contract("fronts have different dimensions".into()));
        }
    }
    let keep = nondominated_indices(&union)?;
    let points: Vec<Vec<f64>> = keep.iter().map(|&i| union[i].to_vec()).collect();
    // Credit the earliest (lowest id) run holding an equal point.
    let provenance = points
        .iter()
        .map(|p| {
            let first = union
                .iter()
                .position(|q| same_point(q, p))
                .expect("kept point is in the union");
            fronts[owner[first]].0.clone()
        })
        .collect();
    let mut inputs: Vec<String> = fronts.iter().map(|(id, _)| id.clone()).collect();
    inputs.sort();
    inputs.dedup();
    Ok(ReferenceFront {
        points: Front { points },
        provenance,
        inputs,
    })
}

/// Per-axis bounds used to map objective space onto the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Normalizer {
    pub fn from_front(front: &Front) -> Result<Self> {
        let dim = front
            .dimension()
            .ok_or_else(|| Error::Contract("cannot normalize against an empty front".into()))?;
        let mut min = vec![f64::INFINITY; dim];
        let mut max = vec![f64::NEG_INFINITY; dim];
        for p in &front.points {
            for k in 0..dim {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Ok(Normalizer { min, max })
    }

    pub fn from_bounds(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() || min.iter().zip(&max).any(|(a, b)| a > b) {
            return Err(Error::Contract("normalizer bounds must satisfy min <= max per axis".into()));
        }
        Ok(Normalizer { min, max })
    }

    pub fn point(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(k, &x)| {
                let span = self.max[k] - self.min[k];
                if span > 0.0 {
                    ((x - self.min[k]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Maps a front into normalized space; points are not re-filtered.
pub fn normalize(front: &Front, norm: &Normalizer) -> Front {
    Front {
        points: front.points.iter().map(|p| norm.point(p)).collect(),
    }
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn non_empty(front: &Front, what: &str) -> Result<()> {
    if front.is_empty() {
        Err(Error::Contract(format!("{what} must not be empty")))
    } else {
        Ok(())
    }
}

/// `sqrt(sum d_i^2) / n` with `d_i` the distance from each front point to its
/// nearest reference point.
pub fn generational_distance(front: &Front, reference: &Front) -> Result<f64> {
    non_empty(front, "front")?;
    non_empty(reference, "reference front")?;
    let sum: f64 = front
        .points
        .iter()
        .map(|a| {
            let d = reference
                .points
                .iter()
                .map(|r| euclidean(a, r))
                .fold(f64::INFINITY, f64::min);
            d * d
        })
        .sum();
    Ok(sum.sqrt() / front.len() as f64)
}

pub fn inverted_generational_distance(front: &Front, reference: &Front) -> Result<f64> {
    generational_distance(reference, front)
}

/// Smallest shift that makes `front` weakly dominate every reference point.
pub fn additive_epsilon(front: &Front, reference: &Front) -> Result<f64> {
    non_empty(front, "front")?;
    non_empty(reference, "reference front")?;
    Ok(reference
        .points
        .iter()
        .map(|r| {
            front
                .points
                .iter()
                .map(|a| a.iter().zip(r).map(|(x, y)| x - y).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Schott's spacing over nearest-neighbour Manhattan distances.
pub fn spacing(front: &Front) -> f64 {
    let n = front.len();
    if n <= 1 {
        return 0.0;
    }
    let nearest: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    front.points[i]
                        .iter()
                        .zip(&front.points[j])
                        .map(|(x, y)| (x - y).abs())
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mean = nearest.iter().sum::<f64>() / n as f64;
    (nearest.iter().map(|d| (mean - d).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Share of the reference front credited to `run`.
pub fn contribution(run: &str, reference: &ReferenceFront) -> Result<f64> {
    if reference.inputs.binary_search_by(|id| id.as_str().cmp(run)).is_err() {
        return Err(Error::Contract(format!("run `{run}` did not contribute to the reference front")));
    }
    if reference.is_empty() {
        return Ok(0.0);
    }
    let credited = reference.provenance.iter().filter(|p| p.as_str() == run).count();
    Ok(credited as f64 / reference.len() as f64)
}

/// Share of the reference front credited to `run` and present in `front`
/// (e.g. an intermediate snapshot of that run).
pub fn contribution_of_front(run: &str, front: &Front, reference: &ReferenceFront) -> Result<f64> {
    contribution(run, reference)?;
    if reference.is_empty() {
        return Ok(0.0);
    }
    let credited = reference
        .points
        .points
        .iter()
        .zip(&reference.provenance)
        .filter(|(p, owner)| owner.as_str() == run && front.points.iter().any(|q| same_point(p, q)))
        .count();
    Ok(credited as f64 / reference.len() as f64)
}

/// All six indicators of one front against a normalized reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndicatorValues {
    pub hv: f64,
    pub gd: f64,
    pub igd: f64,
    pub eps: f64,
    pub spacing: f64,
    pub contribution: f64,
}

/// Indicator evaluation context: a reference front and its normalizer.
#[derive(Debug, Clone)]
pub struct IndicatorSuite {
    pub reference: ReferenceFront,
    pub normalizer: Normalizer,
    normalized_reference: Front,
    pub reference_point: Vec<f64>,
}

impl IndicatorSuite {
    pub fn new(reference: ReferenceFront) -> Result<Self> {
        Self::with_reference_coordinate(reference, DEFAULT_REFERENCE_COORDINATE)
    }

    pub fn with_reference_coordinate(reference: ReferenceFront, coordinate: f64) -> Result<Self> {
        let normalizer = Normalizer::from_front(&reference.points)?;
        let normalized_reference = normalize(&reference.points, &normalizer);
        let reference_point = vec![coordinate; normalizer.min.len()];
        Ok(IndicatorSuite {
            reference,
            normalizer,
            normalized_reference,
            reference_point,
        })
    }

    pub fn normalize(&self, front: &Front) -> Front {
        normalize(front, &self.normalizer)
    }

    pub fn hypervolume(&self, front: &Front) -> Result<f64> {
        hypervolume(&self.normalize(front), &self.reference_point)
    }

    /// Evaluates `front`, a (possibly intermediate) front of `run`.
    pub fn evaluate(&self, run: &str, front: &Front) -> Result<IndicatorValues> {
        let normalized = self.normalize(front);
        Ok(IndicatorValues {
            hv: hypervolume(&normalized, &self.reference_point)?,
            gd: generational_distance(&normalized, &self.normalized_reference)?,
            igd: inverted_generational_distance(&normalized, &self.normalized_reference)?,
            eps: additive_epsilon(&normalized, &self.normalized_reference)?,
            spacing: spacing(&normalized),
            contribution: contribution_of_front(run, front, &self.reference)?,
        })
    }
}

/// One line of an indicator report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorRecord {
    pub run: String,
    pub evals: usize,
    #[serde(flatten)]
    pub values: IndicatorValues,
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn front(points: &[&[f64]]) -> Front {
        Front {
            points: points.iter().map(|p| p.to_vec()).collect(),
        }
    }

    #[test]
    fn reference_front_examples() {
        let r = build_reference_front(&[("a".into(), front(&[&[0.0, 1.0]])), ("b".into(), front(&[&[1.0, 0.0]]))]).unwrap();
        assert_eq!(r.points.points, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(r.provenance, vec!["a".to_string(), "b".to_string()]);

        let r = build_reference_front(&[("a".into(), front(&[&[0.0, 0.0]])), ("b".into(), front(&[&[1.0, 1.0]]))]).unwrap();
        assert_eq!(r.points.points, vec![vec![0.0, 0.0]]);
        assert!(build_reference_front(&[("a".into(), front(&[&[0.0]])), ("b".into(), front(&[&[1.0, 1.0]]))]).is_err());
    }

    #[test]
    fn shared_points_go_to_the_lowest_run_id() {
        let r = build_reference_front(&[("z".into(), front(&[&[0.5, 0.5]])), ("m".into(), front(&[&[0.5, 0.5]]))]).unwrap();
        assert_eq!(r.provenance, vec!["m".to_string()]);
        assert_eq!(contribution("m", &r).unwrap(), 1.0);
        assert_eq!(contribution("z", &r).unwrap(), 0.0);
        assert!(contribution("q", &r).is_err());
    }

    #[test]
    fn normalize_examples() {
        let norm = Normalizer::from_bounds(vec![0.0, 10.0], vec![2.0, 20.0]).unwrap();
        assert_eq!(normalize(&front(&[&[1.0, 15.0]]), &norm).points, vec![vec![0.5, 0.5]]);
        assert_eq!(normalize(&front(&[&[0.0, 10.0]]), &norm).points, vec![vec![0.0, 0.0]]);
        let flat = Normalizer::from_bounds(vec![3.0], vec![3.0]).unwrap();
        assert_eq!(flat.point(&[3.0]), vec![0.0]);
    }

    #[test]
    fn distance_indicators() {
        let f = front(&[&[0.1, 1.0]]);
        let r = front(&[&[0.0, 1.0]]);
        assert_abs_diff_eq!(generational_distance(&f, &r).unwrap(), 0.1, epsilon = 1e-12);
        assert_eq!(generational_distance(&r, &r).unwrap(), 0.0);
        assert_eq!(inverted_generational_distance(&r, &r).unwrap(), 0.0);
        assert!(generational_distance(&Front::default(), &r).is_err());
    }

    #[test]
    fn epsilon_examples() {
        let r = front(&[&[0.1, 0.1]]);
        assert_eq!(additive_epsilon(&r, &r).unwrap(), 0.0);
        assert_abs_diff_eq!(additive_epsilon(&front(&[&[0.2, 0.2]]), &r).unwrap(), 0.1, epsilon = 1e-12);
    }

    #[test]
    fn spacing_examples() {
        assert_eq!(spacing(&front(&[&[0.3, 0.3]])), 0.0);
        assert_eq!(spacing(&front(&[&[0.0, 0.0], &[1.0, 2.0]])), 0.0);
        let s = spacing(&front(&[&[0.0, 0.0], &[0.0, 1.0], &[0.0, 3.0]]));
        assert_abs_diff_eq!(s, ((1.0 / 9.0 + 1.0 / 9.0 + 4.0 / 9.0) / 2.0f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s, 0.5774, epsilon = 1e-4);
    }

    #[test]
    fn contribution_counts_credited_points() {
        let r = build_reference_front(&[
            ("a".into(), front(&[&[0.0, 3.0], &[1.0, 2.0], &[2.0, 1.0]])),
            ("b".into(), front(&[&[3.0, 0.0], &[3.0, 3.0]])),
        ])
        .unwrap();
        assert_eq!(contribution("a", &r).unwrap(), 0.75);
        assert_eq!(contribution("b", &r).unwrap(), 0.25);
    }
}
