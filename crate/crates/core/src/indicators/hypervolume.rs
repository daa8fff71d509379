//! Hypervolume: exact slicing for up to four objectives, seeded Monte-Carlo above.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pareto::Front;

/// Largest dimension computed exactly.
pub const EXACT_MAX_DIMENSION: usize = 4;
pub const MONTE_CARLO_SAMPLES: usize = 1_000_000;
const MONTE_CARLO_SEED: u64 = 0x5eed_4b1d;
const CHUNK: usize = 10_000;

fn check(front: &Front, reference: &[f64]) -> Result<()> {
    for p in &front.points {
        if p.len() != reference.len() {
            return Err(Error::Contract(format!(
                "point {p:?} has dimension {}, reference point has {}",
                p.len(),
                reference.len()
            )));
        }
        if p.iter().zip(reference).any(|(x, r)| x > r) {
            return Err(Error::Contract(format!("point {p:?} lies beyond the reference point {reference:?}")));
        }
    }
    Ok(())
}

/// Volume dominated by `front` and bounded by `reference`.
pub fn hypervolume(front: &Front, reference: &[f64]) -> Result<f64> {
    check(front, reference)?;
    if front.is_empty() {
        return Ok(0.0);
    }
    if reference.len() <= EXACT_MAX_DIMENSION {
        Ok(exact(&front.points, reference))
    } else {
        Ok(estimate(front, reference, MONTE_CARLO_SAMPLES, MONTE_CARLO_SEED))
    }
}

/// Exact hypervolume by recursive slicing along the last axis.
pub fn hypervolume_exact(front: &Front, reference: &[f64]) -> Result<f64> {
    check(front, reference)?;
    Ok(exact(&front.points, reference))
}

/// Monte-Carlo estimate with a caller-chosen sample count and seed.
pub fn hypervolume_monte_carlo(front: &Front, reference: &[f64], samples: usize, seed: u64) -> Result<f64> {
    check(front, reference)?;
    Ok(estimate(front, reference, samples, seed))
}

fn exact(points: &[Vec<f64>], reference: &[f64]) -> f64 {
    let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
    slice_volume(&refs, reference, reference.len())
}

fn slice_volume(points: &[&[f64]], reference: &[f64], dim: usize) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    match dim {
        0 => 1.0,
        1 => {
            let best = points.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            (reference[0] - best).max(0.0)
        }
        2 => {
            let mut sorted: Vec<&[f64]> = points.to_vec();
            sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
            let mut area = 0.0;
            let mut floor = reference[1];
            for (i, p) in sorted.iter().enumerate() {
                floor = floor.min(p[1]);
                let next_x = sorted.get(i + 1).map_or(reference[0], |q| q[0]);
                area += (next_x - p[0]) * (reference[1] - floor);
            }
            area
        }
        _ => {
            let axis = dim - 1;
            let mut sorted: Vec<&[f64]> = points.to_vec();
            sorted.sort_by(|a, b| a[axis].total_cmp(&b[axis]));
            let mut volume = 0.0;
            for i in 0..sorted.len() {
                let top = sorted.get(i + 1).map_or(reference[axis], |q| q[axis]);
                let depth = top - sorted[i][axis];
                if depth > 0.0 {
                    volume += depth * slice_volume(&sorted[..=i], reference, axis);
                }
            }
            volume
        }
    }
}

fn estimate(front: &Front, reference: &[f64], samples: usize, seed: u64) -> f64 {
    if front.is_empty() || samples == 0 {
        return 0.0;
    }
    let dim = reference.len();
    let lower: Vec<f64> = (0..dim)
        .map(|k| front.points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let box_volume: f64 = lower.iter().zip(reference).map(|(l, r)| r - l).product();
    if box_volume <= 0.0 {
        return 0.0;
    }
    let mut sorted: Vec<&[f64]> = front.points.iter().map(Vec::as_slice).collect();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]));

    let chunks = samples.div_ceil(CHUNK);
    let hits: usize = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let count = CHUNK.min(samples - chunk * CHUNK);
            let mut sample = vec![0.0; dim];
            let mut hits = 0;
            for _ in 0..count {
                for k in 0..dim {
                    sample[k] = lower[k] + rng.random::<f64>() * (reference[k] - lower[k]);
                }
                let covered = sorted
                    .iter()
                    .take_while(|p| p[0] <= sample[0])
                    .any(|p| p.iter().zip(&sample).all(|(x, s)| x <= s));
                if covered {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    box_volume * hits as f64 / samples as f64
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
    fn single_box() {
        assert_abs_diff_eq!(hypervolume(&front(&[&[0.5, 0.5]]), &[1.0, 1.0]).unwrap(), 0.25);
    }

    #[test]
    fn two_boxes_overlap() {
        let f = front(&[&[0.0, 0.5], &[0.5, 0.0]]);
        assert_abs_diff_eq!(hypervolume(&f, &[1.0, 1.0]).unwrap(), 0.75);
    }

    #[test]
    fn point_on_the_reference_boundary_adds_nothing() {
        let f = front(&[&[1.0, 0.2], &[0.3, 1.0]]);
        assert_eq!(hypervolume(&f, &[1.0, 1.0]).unwrap(), 0.0);
        let f3 = front(&[&[1.0, 1.0, 1.0]]);
        assert_eq!(hypervolume(&f3, &[1.0, 1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn three_d_inclusion_exclusion() {
        // boxes [0.2,1]x[0.5,1]x[0.5,1] and [0.5,1]x[0.2,1]x[0.5,1]:
        // 0.8*0.5*0.5 + 0.5*0.8*0.5 - 0.5*0.5*0.5
        let f = front(&[&[0.2, 0.5, 0.5], &[0.5, 0.2, 0.5]]);
        assert_abs_diff_eq!(hypervolume(&f, &[1.0; 3]).unwrap(), 0.2 + 0.2 - 0.125, epsilon = 1e-12);
    }

    #[test]
    fn beyond_reference_is_a_contract_violation() {
        let err = hypervolume(&front(&[&[1.2, 0.0]]), &[1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("1.2"));
    }

    #[test]
    fn monte_carlo_tracks_exact_in_three_dimensions() {
        let f = front(&[&[0.1, 0.6, 0.4], &[0.5, 0.2, 0.7], &[0.8, 0.7, 0.1]]);
        let exact = hypervolume_exact(&f, &[1.1; 3]).unwrap();
        let mc = hypervolume_monte_carlo(&f, &[1.1; 3], MONTE_CARLO_SAMPLES, 42).unwrap();
        assert!((exact - mc).abs() < 0.005, "{exact} vs {mc}");
    }
}
