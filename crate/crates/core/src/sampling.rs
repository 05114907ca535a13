//! Exact variate generators for the subordinator laws.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson, StandardNormal};
use std::f64::consts::PI;

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Inverse Gaussian variate with the given mean and shape, by the
/// transformation-with-rejection method (Michael, Schucany and Haas).
///
/// The smaller root is evaluated in the cancellation-free form
/// `mean / (1 + w + sqrt(w^2 + 2w))`, `w = mean·ν²/(2·shape)`, which stays
/// accurate when `shape` is tiny (short time steps).
pub fn inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, mean: f64, shape: f64) -> f64 {
    debug_assert!(mean > 0.0 && shape > 0.0);
    let nu = standard_normal(rng);
    let w = mean * nu * nu / (2.0 * shape);
    let x = mean / (1.0 + w + (w * w + 2.0 * w).sqrt());
    let u: f64 = rng.random();
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

/// One-sided strictly stable variate with index `alpha ∈ (0,1)` and
/// `E exp(-λS) = exp(-λ^alpha)` (Kanter's representation, the totally
/// skewed case of the Chambers–Mallows–Stuck generator).
pub fn positive_stable<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    // U uniform on (0, π); the open interval keeps both sines positive.
    let u = loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            break v * PI;
        }
    };
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * u).sin() / e;
    a * b.powf((1.0 - alpha) / alpha)
}

/// Gamma variate with the given shape and unit rate.
pub fn gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    Gamma::new(shape, 1.0).expect("shape validated by caller").sample(rng)
}

pub fn poisson<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let n: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    n as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::SeedSchedule;

    fn mean_of(n: usize, mut f: impl FnMut() -> f64) -> (f64, f64) {
        let xs: Vec<f64> = (0..n).map(|_| f()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        (m, (v / n as f64).sqrt())
    }

    #[test]
    fn inverse_gaussian_mean_and_variance() {
        let mut rng = SeedSchedule::new(3).stream(0);
        let (m, se) = mean_of(200_000, || inverse_gaussian(&mut rng, 0.5, 1.0));
        assert!((m - 0.5).abs() < 4.0 * se, "{m} ± {se}");
        // Var = mean^3 / shape = 0.125
        let mut rng = SeedSchedule::new(4).stream(0);
        let (m2, se2) = mean_of(200_000, || {
            let x = inverse_gaussian(&mut rng, 0.5, 1.0);
            (x - 0.5).powi(2)
        });
        assert!((m2 - 0.125).abs() < 4.0 * se2, "{m2} ± {se2}");
    }

    #[test]
    fn inverse_gaussian_tiny_shape_stays_positive() {
        let mut rng = SeedSchedule::new(5).stream(0);
        for _ in 0..10_000 {
            let x = inverse_gaussian(&mut rng, 1e-3, 1e-6);
            assert!(x > 0.0 && x.is_finite());
        }
    }

    #[test]
    fn positive_stable_laplace_transform() {
        // E exp(-S) = exp(-1) for every alpha.
        for alpha in [0.25, 0.5, 0.75] {
            let mut rng = SeedSchedule::new(11).stream(0);
            let (m, se) = mean_of(100_000, || (-positive_stable(&mut rng, alpha)).exp());
            assert!((m - (-1.0f64).exp()).abs() < 4.0 * se, "alpha {alpha}: {m} ± {se}");
        }
    }
}
