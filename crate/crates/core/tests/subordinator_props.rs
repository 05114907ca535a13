use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sublevy::verify::ks;
use sublevy::{JumpLaw, SubordinatorJumps, SubordinatorSpec, UnivariateSubordinator};

fn battery() -> Vec<(&'static str, SubordinatorSpec)> {
    let ig = UnivariateSubordinator::InverseGaussian { s: 1.0, c: 2.0 };
    let st = UnivariateSubordinator::Stable { alpha: 0.5, scale: 1.0 };
    let ga = UnivariateSubordinator::Gamma { shape: 1.5 };
    vec![
        ("ig", SubordinatorSpec::univariate(ig).unwrap()),
        ("stable", SubordinatorSpec::univariate(st).unwrap()),
        ("gamma", SubordinatorSpec::univariate(ga).unwrap()),
        (
            "independent+drift",
            SubordinatorSpec::new(vec![0.2, 0.0], SubordinatorJumps::Independent(vec![Some(ig), Some(ga)])).unwrap(),
        ),
        (
            "compound-poisson",
            SubordinatorSpec::new(
                vec![0.0, 0.1],
                SubordinatorJumps::CompoundPoisson {
                    rate: 3.0,
                    law: JumpLaw::Atoms {
                        weights: vec![0.4, 0.6],
                        points: vec![vec![1.0, 0.0], vec![0.5, 2.0]],
                    },
                },
            )
            .unwrap(),
        ),
        (
            "compound-poisson-exp",
            SubordinatorSpec::new(
                vec![0.0, 0.0],
                SubordinatorJumps::CompoundPoisson {
                    rate: 2.0,
                    law: JumpLaw::Exponential {
                        direction: vec![1.0, 0.5],
                        mean: 0.7,
                    },
                },
            )
            .unwrap(),
        ),
        (
            "common-factor",
            SubordinatorSpec::new(
                vec![0.0, 0.0],
                SubordinatorJumps::CommonFactor {
                    loadings: vec![1.0, 0.5],
                    factor: ig,
                    idiosyncratic: vec![None, Some(ga)],
                },
            )
            .unwrap(),
        ),
    ]
}

fn point(d: usize, re: &[f64], im: &[f64]) -> Vec<Complex64> {
    (0..d).map(|j| Complex64::new(-re[j], im[j])).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn psi_is_real_nonpositive_on_negative_reals(re in prop::collection::vec(0.0f64..20.0, 2)) {
        for (name, sub) in battery() {
            let d = sub.components();
            let psi = sub.laplace_exponent(&point(d, &re, &[0.0; 2])).unwrap();
            prop_assert!(psi.im.abs() <= 1e-12 * psi.re.abs().max(1.0), "{name}: {psi}");
            prop_assert!(psi.re <= 1e-15, "{name}: {psi}");
        }
    }

    #[test]
    fn real_part_bounded_by_value_at_real_part(
        re in prop::collection::vec(0.0f64..10.0, 2),
        im in prop::collection::vec(-10.0f64..10.0, 2),
    ) {
        for (name, sub) in battery() {
            let d = sub.components();
            let full = sub.laplace_exponent(&point(d, &re, &im)).unwrap();
            let real = sub.laplace_exponent(&point(d, &re, &[0.0; 2])).unwrap();
            prop_assert!(full.re <= real.re + 1e-12 * real.re.abs().max(1.0), "{name}: {full} vs {real}");
        }
    }
}

#[test]
fn psi_vanishes_at_zero() {
    for (name, sub) in battery() {
        let zero = vec![Complex64::new(0.0, 0.0); sub.components()];
        assert_eq!(sub.laplace_exponent(&zero).unwrap(), Complex64::new(0.0, 0.0), "{name}");
    }
}

#[test]
fn laplace_transform_of_increments() {
    // |mean of e^{⟨s,Θ(dt)⟩} − exp(dt ψ(s))| ≤ 4 SE on a grid with Re s ≤ 0.
    let n = 100_000;
    let dt = 0.7;
    let grid = [
        ([0.5, 0.2], [0.0, 0.0]),
        ([1.0, 0.0], [1.5, -0.5]),
        ([0.0, 0.3], [-2.0, 3.0]),
        ([2.0, 2.0], [0.5, 0.5]),
    ];
    for (name, sub) in battery() {
        let d = sub.components();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<Vec<f64>> = (0..n).map(|_| sub.sample_increment(&mut rng, dt).unwrap()).collect();
        for (re, im) in &grid {
            let s = point(d, re, im);
            let want = (dt * sub.laplace_exponent(&s).unwrap()).exp();
            let (mut sum, mut sum2) = (Complex64::new(0.0, 0.0), 0.0);
            for x in &draws {
                let e: Complex64 = s.iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>().exp();
                sum += e;
                sum2 += e.norm_sqr();
            }
            let mean = sum / n as f64;
            let var = (sum2 / n as f64 - mean.norm_sqr()).max(0.0);
            let se = (var / n as f64).sqrt().max(1e-12);
            assert!(
                (mean - want).norm() <= 4.0 * se,
                "{name} at {s:?}: {mean} vs {want} (se {se})"
            );
        }
    }
}

#[test]
fn increments_are_additive_in_law() {
    // Θ(dt) + Θ'(dt) against Θ(2dt): KS per component, Bonferroni 0.01.
    let n = 20_000;
    let dt = 0.4;
    for (name, sub) in battery() {
        let d = sub.components();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let mut two: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
        let mut one: Vec<Vec<f64>> = vec![Vec::with_capacity(n); d];
        for _ in 0..n {
            let a = sub.sample_increment(&mut rng, dt).unwrap();
            let b = sub.sample_increment(&mut rng, dt).unwrap();
            let c = sub.sample_increment(&mut rng, 2.0 * dt).unwrap();
            for j in 0..d {
                two[j].push(a[j] + b[j]);
                one[j].push(c[j]);
            }
        }
        for j in 0..d {
            let (_, p) = ks::two_sample(&two[j], &one[j]);
            assert!(p > 0.01 / d as f64, "{name}[{j}]: p = {p}");
        }
    }
}

#[test]
fn increments_dominate_drift() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (name, sub) in battery() {
        for _ in 0..1000 {
            let x = sub.sample_increment(&mut rng, 0.5).unwrap();
            for (x, a) in x.iter().zip(sub.drift()) {
                assert!(*x >= a * 0.5, "{name}");
            }
        }
    }
}

#[test]
fn stable_tail_follows_power_law() {
    // P(Θ(1) > x)·x^α → scale/Γ(1−α); for α = ½, scale 1: 1/√π.
    let law = UnivariateSubordinator::Stable { alpha: 0.5, scale: 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let n = 400_000;
    let draws: Vec<f64> = (0..n).map(|_| law.sample(&mut rng, 1.0)).collect();
    let limit = 1.0 / std::f64::consts::PI.sqrt();
    for x in [100.0, 400.0] {
        let p = draws.iter().filter(|&&t| t > x).count() as f64 / n as f64;
        let se = (p / n as f64).sqrt() * x.sqrt();
        assert!(
            (p * x.sqrt() - limit).abs() < 4.0 * se + 0.02,
            "x={x}: {}",
            p * x.sqrt()
        );
    }
}
