//! Small numeric helpers shared by the sampler and the post-processing code.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Correctly rounded sum of `values` (Shewchuk's exact partials).
///
/// The result does not depend on the order of the inputs, and duplicating every
/// input exactly doubles it, which keeps posterior means stable under draw
/// reordering and duplication.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials to a single float, handling the half-way case.
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        n -= 1;
        let x = hi;
        let y = partials[n];
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        let yr = x - hi;
        if y == yr {
            hi = x;
        }
    }
    hi
}

/// Order-independent mean.
pub fn exact_mean(values: &[f64]) -> f64 {
    exact_sum(values.iter().copied()) / values.len() as f64
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with denominator `n - 1`.
pub fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Lower empirical quantile: the smallest sorted value whose empirical CDF is
/// at least `prob`, i.e. `sorted[ceil(prob * n) - 1]`.
pub fn lower_quantile(sorted: &[f64], prob: f64) -> f64 {
    let n = sorted.len();
    let idx = ((prob * n as f64).ceil() as usize).clamp(1, n) - 1;
    sorted[idx]
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Log of the mass of `Normal(center, scale)` inside `(lo, hi)`.
pub fn log_normal_mass(center: f64, scale: f64, lo: f64, hi: f64) -> f64 {
    let n = std_normal();
    let a = (lo - center) / scale;
    let b = (hi - center) / scale;
    // Use the tail where the CDF values keep their precision.
    let mass = if a > 0.0 {
        n.sf(a) - n.sf(b)
    } else {
        n.cdf(b) - n.cdf(a)
    };
    mass.ln()
}

/// Draw from `Normal(center, scale)` truncated to the open interval `(lo, hi)`
/// by CDF inversion. Returns `None` if rounding pushes the draw onto a bound.
pub fn truncated_normal<R: Rng + ?Sized>(
    rng: &mut R,
    center: f64,
    scale: f64,
    lo: f64,
    hi: f64,
) -> Option<f64> {
    let n = std_normal();
    let a = (lo - center) / scale;
    let b = (hi - center) / scale;
    let u: f64 = rng.random();
    let z = if a > 0.0 {
        // Upper tail: invert the survival function.
        let (sa, sb) = (n.sf(a), n.sf(b));
        -n.inverse_cdf(sa - u * (sa - sb))
    } else {
        let (fa, fb) = (n.cdf(a), n.cdf(b));
        n.inverse_cdf(fa + u * (fb - fa))
    };
    let x = center + scale * z;
    (x > lo && x < hi && x.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_sum_is_order_and_duplication_stable() {
        let xs = [1e16, 1.0, -1e16, 3.5, 0.1, 0.2, 0.3];
        let mut ys = xs;
        ys.reverse();
        assert_eq!(exact_sum(xs), exact_sum(ys));
        assert!((exact_sum(xs) - 5.1).abs() < 1e-15);
        let dup: Vec<f64> = xs.iter().flat_map(|&x| [x, x]).collect();
        assert_eq!(exact_sum(dup), 2.0 * exact_sum(xs));
        assert_eq!(exact_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn exact_mean_of_permutations_is_identical() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1013) as f64 * 0.013_7).collect();
        let mut ys = xs.clone();
        ys.reverse();
        assert_eq!(exact_mean(&xs), exact_mean(&ys));
    }

    #[test]
    fn lower_quantile_on_one_to_hundred() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert!(lower_quantile(&xs, 0.025) <= 3.0);
        assert!(lower_quantile(&xs, 0.975) >= 98.0);
        assert_eq!(lower_quantile(&xs, 0.5), 50.0);
        assert_eq!(lower_quantile(&xs, 0.0), 1.0);
        assert_eq!(lower_quantile(&xs, 1.0), 100.0);
    }

    #[test]
    fn truncated_normal_stays_inside_and_matches_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (lo, hi) = (-0.5, 2.0);
        let n = 20_000;
        let mut below_zero = 0;
        for _ in 0..n {
            let x = truncated_normal(&mut rng, 0.3, 1.0, lo, hi).unwrap();
            assert!(x > lo && x < hi);
            if x < 0.0 {
                below_zero += 1;
            }
        }
        let expected = (log_normal_mass(0.3, 1.0, lo, 0.0) - log_normal_mass(0.3, 1.0, lo, hi)).exp();
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((below_zero as f64 / n as f64 - expected).abs() < 4.0 * se);
    }

    #[test]
    fn truncated_normal_handles_half_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let x = truncated_normal(&mut rng, 1.0, 0.5, 0.9, f64::INFINITY).unwrap();
            assert!(x > 0.9);
            let y = truncated_normal(&mut rng, 1.0, 0.5, f64::NEG_INFINITY, 1.1).unwrap();
            assert!(y < 1.1);
        }
        assert!((log_normal_mass(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY)).abs() < 1e-15);
    }
}
