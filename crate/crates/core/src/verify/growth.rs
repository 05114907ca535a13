use std::time::Instant;

use super::{Probe, VerificationReport, K_SIGMA};
use crate::base::{truncate_in_place, BaseProcessSpec};
use crate::error::{invalid, Result};
use crate::mc::{run_batches, MeanAccumulator, SeedSchedule};

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCheckConfig {
    /// Multi-time points `θ ∈ R_+^d`.
    pub thetas: Vec<Vec<f64>>,
    pub samples: usize,
    pub k: f64,
}

impl GrowthCheckConfig {
    pub fn new(thetas: Vec<Vec<f64>>, samples: usize) -> Self {
        Self {
            thetas,
            samples,
            k: K_SIGMA,
        }
    }
}

struct Estimate {
    norm: f64,
    abs: MeanAccumulator,
    chi: Vec<MeanAccumulator>,
}

impl Estimate {
    fn chi_norm(&self) -> (f64, f64) {
        let m: f64 = self.chi.iter().map(|c| c.mean().powi(2)).sum::<f64>().sqrt();
        let se: f64 = self.chi.iter().map(|c| c.standard_error().powi(2)).sum::<f64>().sqrt();
        (m, se)
    }
}

fn euclid(theta: &[f64]) -> f64 {
    theta.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Monte Carlo growth function `f(θ) = E|L(θ)|` on a grid, checked against
/// the linear growth bounds and against subadditivity and monotonicity on
/// every grid pair whose sum is also a grid point.
pub fn check_growth_bounds(base: &BaseProcessSpec, cfg: &GrowthCheckConfig, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let d = base.layout().components();
    if cfg.samples < 2 {
        return Err(invalid("samples", "need at least two draws"));
    }
    for theta in &cfg.thetas {
        if theta.len() != d || theta.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid(
                "thetas",
                format!("each θ needs {d} finite non-negative entries"),
            ));
        }
    }
    let constants = base.growth_bound();
    let dim = base.layout().total_dim();
    let schedule = SeedSchedule::new(seed).derive("growth");
    let estimates: Vec<Estimate> = cfg
        .thetas
        .iter()
        .enumerate()
        .map(|(i, theta)| {
            let batches = run_batches(&schedule.derive_index(i as u64), cfg.samples, |rng, count| {
                let mut x = vec![0.0; dim];
                let mut abs = MeanAccumulator::default();
                let mut chi = vec![MeanAccumulator::default(); dim];
                for _ in 0..count {
                    base.sample_at_into(rng, theta, &mut x);
                    abs.push(x.iter().map(|v| v * v).sum::<f64>().sqrt());
                    truncate_in_place(&mut x);
                    for (c, v) in chi.iter_mut().zip(&x) {
                        c.push(*v);
                    }
                }
                (abs, chi)
            });
            let mut abs = MeanAccumulator::default();
            let mut chi = vec![MeanAccumulator::default(); dim];
            for (a, c) in &batches {
                abs.merge(a);
                for (t, s) in chi.iter_mut().zip(c) {
                    t.merge(s);
                }
            }
            Estimate {
                norm: euclid(theta),
                abs,
                chi,
            }
        })
        .collect();

    let k = cfg.k;
    let mut probes = Vec::new();
    for (theta, e) in cfg.thetas.iter().zip(&estimates) {
        let f = e.abs.mean();
        let se = e.abs.standard_error();
        let bound = e.norm * constants.c1 + e.norm.sqrt() * constants.c2;
        probes.push(Probe::below(
            format!("f({theta:?}) <= |θ|C1+√|θ|C2"),
            bound,
            f,
            se,
            k * se,
        ));
        if let Some(c) = constants.martingale {
            probes.push(Probe::below(
                format!("f({theta:?}) <= √|θ|C"),
                e.norm.sqrt() * c,
                f,
                se,
                k * se,
            ));
        }
        let (chi, chi_se) = e.chi_norm();
        probes.push(Probe::below(
            format!("|Eχ(L({theta:?}))| <= |θ|Cχ"),
            e.norm * constants.c_chi,
            chi,
            chi_se,
            k * chi_se,
        ));
    }

    // Rounding slack for deterministic (zero-variance) grid points.
    let eps = |x: f64| 1e-12 * (1.0 + x.abs());
    for (a, ta) in cfg.thetas.iter().enumerate() {
        for (b, tb) in cfg.thetas.iter().enumerate().skip(a) {
            let sum: Vec<f64> = ta.iter().zip(tb).map(|(x, y)| x + y).collect();
            let Some(c) = cfg.thetas.iter().position(|t| {
                t.iter()
                    .zip(&sum)
                    .all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + y.abs()))
            }) else {
                continue;
            };
            let (fa, fb, fc) = (&estimates[a].abs, &estimates[b].abs, &estimates[c].abs);
            let se = (fa.standard_error().powi(2) + fb.standard_error().powi(2) + fc.standard_error().powi(2)).sqrt();
            let rhs = fa.mean() + fb.mean();
            probes.push(Probe::below(
                format!("f({sum:?}) <= f({ta:?}) + f({tb:?})"),
                rhs,
                fc.mean(),
                se,
                k * se + eps(rhs),
            ));
            for (i, fi) in [(a, fa), (b, fb)] {
                let se = (fi.standard_error().powi(2) + fc.standard_error().powi(2)).sqrt();
                probes.push(Probe::below(
                    format!("f({:?}) <= f({sum:?})", cfg.thetas[i]),
                    fc.mean(),
                    fi.mean(),
                    se,
                    k * se + eps(fc.mean()),
                ));
            }
        }
    }

    let mut report = VerificationReport::from_probes("growth", probes, seed, cfg.samples, start);
    report.notes.push(format!(
        "C1={:.6e} C2={:.6e} Cchi={:.6e}{}",
        constants.c1,
        constants.c2,
        constants.c_chi,
        constants
            .martingale
            .map_or(String::new(), |c| format!(" Cmart={c:.6e}"))
    ));
    if let Some(e) = estimates.iter().find(|e| (e.norm - 1.0).abs() < 1e-12) {
        report
            .notes
            .push(format!("empirical |Eχ(L(θ))| at |θ|=1: {:.6e}", e.chi_norm().0));
    }
    Ok(report)
}
