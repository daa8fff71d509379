//! Real-coded variation operators on `[0, 1]` genes.

use rand::Rng;

use super::encoding::Genotype;

const EPS: f64 = 1.0e-14;
const LOWER: f64 = 0.0;
const UPPER: f64 = 1.0;

/// Simulated binary crossover with distribution index `di`, applied with
/// probability `rate`; each gene crosses with probability one half.
///
/// # Panics
/// If the parents differ in length.
pub fn sbx_crossover<R: Rng + ?Sized>(a: &Genotype, b: &Genotype, rate: f64, di: f64, rng: &mut R) -> (Genotype, Genotype) {
    assert_eq!(a.len(), b.len(), "sbx_crossover: parent lengths differ");
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    if rng.random::<f64>() > rate {
        return (c1, c2);
    }
    let exponent = 1.0 / (di + 1.0);
    for i in 0..a.len() {
        if rng.random::<f64>() > 0.5 {
            continue;
        }
        let (x1, x2) = (a.0[i], b.0[i]);
        if (x1 - x2).abs() <= EPS {
            continue;
        }
        let (y1, y2) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        let u: f64 = rng.random();

        let spread = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(di + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(exponent)
            } else {
                (1.0 / (2.0 - u * alpha)).powf(exponent)
            }
        };
        let betaq = spread(1.0 + 2.0 * (y1 - LOWER) / (y2 - y1));
        let lo = (0.5 * ((y1 + y2) - betaq * (y2 - y1))).clamp(LOWER, UPPER);
        let betaq = spread(1.0 + 2.0 * (UPPER - y2) / (y2 - y1));
        let hi = (0.5 * ((y1 + y2) + betaq * (y2 - y1))).clamp(LOWER, UPPER);

        if rng.random::<f64>() <= 0.5 {
            c1.0[i] = hi;
            c2.0[i] = lo;
        } else {
            c1.0[i] = lo;
            c2.0[i] = hi;
        }
    }
    (c1, c2)
}

/// Polynomial mutation: each gene mutates with probability `rate`.
pub fn polynomial_mutation<R: Rng + ?Sized>(g: &Genotype, rate: f64, di: f64, rng: &mut R) -> Genotype {
    let mut out = g.clone();
    mutate_in_place(&mut out, rate, di, rng);
    out
}

pub fn mutate_in_place<R: Rng + ?Sized>(g: &mut Genotype, rate: f64, di: f64, rng: &mut R) {
    let exponent = 1.0 / (di + 1.0);
    for y in g.0.iter_mut() {
        if rng.random::<f64>() > rate {
            continue;
        }
        let delta1 = (*y - LOWER) / (UPPER - LOWER);
        let delta2 = (UPPER - *y) / (UPPER - LOWER);
        let u: f64 = rng.random();
        let deltaq = if u <= 0.5 {
            let xy = 1.0 - delta1;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(di + 1.0);
            val.powf(exponent) - 1.0
        } else {
            let xy = 1.0 - delta2;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(di + 1.0);
            1.0 - val.powf(exponent)
        };
        *y = (*y + deltaq * (UPPER - LOWER)).clamp(LOWER, UPPER);
    }
}
