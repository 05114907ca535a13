use std::time::Instant;

use super::{Probe, VerificationReport, K_SIGMA};
use crate::error::{invalid, Result};
use crate::mc::{run_batches, CompensatedSum, SeedSchedule};
use crate::space::{dot, SpaceLayout, TruncatedVector};
use crate::subordination::SubordinatedProcessSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct CfCheckConfig {
    pub probes: Vec<TruncatedVector>,
    pub samples: usize,
    pub t: f64,
    pub k: f64,
}

/// Minimum sample count for the default tolerances.
pub const MIN_CF_SAMPLES: usize = 10_000;

/// `u = 0` followed by `count − 1` random directions with radii growing
/// linearly up to `max_radius`.
pub fn probe_grid(
    layout: &SpaceLayout,
    count: usize,
    max_radius: f64,
    schedule: &SeedSchedule,
) -> Vec<TruncatedVector> {
    let mut out = vec![TruncatedVector::zeros(layout)];
    let dirs = super::random_directions(layout, count.saturating_sub(1), schedule);
    let m = dirs.len().max(1) as f64;
    for (i, u) in dirs.into_iter().enumerate() {
        out.push(u.scaled(max_radius * (i + 1) as f64 / m));
    }
    out
}

impl CfCheckConfig {
    pub fn new(probes: Vec<TruncatedVector>, samples: usize) -> Self {
        Self {
            probes,
            samples,
            t: 1.0,
            k: K_SIGMA,
        }
    }
}

/// Empirical vs analytic characteristic function of `X(t)`.
pub fn check_cf(spec: &SubordinatedProcessSpec, cfg: &CfCheckConfig, seed: u64) -> Result<VerificationReport> {
    check_cf_against(spec, spec, cfg, seed)
}

/// Samples from `sampler`, compares with the exponent of `analytic`. With
/// `analytic` a perturbed copy this is a power (negative-control) check.
pub fn check_cf_against(
    sampler: &SubordinatedProcessSpec,
    analytic: &SubordinatedProcessSpec,
    cfg: &CfCheckConfig,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if cfg.samples < MIN_CF_SAMPLES {
        return Err(invalid(
            "samples",
            format!("CF check needs at least {MIN_CF_SAMPLES} draws"),
        ));
    }
    if !(cfg.t > 0.0) {
        return Err(invalid("t", "time must be > 0"));
    }
    for u in &cfg.probes {
        sampler.layout().ensure_same(u.layout())?;
        analytic.layout().ensure_same(u.layout())?;
    }
    let schedule = SeedSchedule::new(seed).derive("cf");
    let dim = sampler.layout().total_dim();
    let d = sampler.subordinator().components();
    let batches = run_batches(&schedule, cfg.samples, |rng, count| {
        let mut sums = vec![(CompensatedSum::new(), CompensatedSum::new()); cfg.probes.len()];
        let mut theta = vec![0.0; d];
        let mut x = vec![0.0; dim];
        for _ in 0..count {
            sampler.sample_into(rng, cfg.t, &mut theta, &mut x);
            for ((c, s), u) in sums.iter_mut().zip(&cfg.probes) {
                let (sin, cos) = dot(u.as_slice(), &x).sin_cos();
                c.add(cos);
                s.add(sin);
            }
        }
        sums
    });
    let mut totals = vec![(CompensatedSum::new(), CompensatedSum::new()); cfg.probes.len()];
    for batch in &batches {
        for ((tc, ts), (c, s)) in totals.iter_mut().zip(batch) {
            tc.merge(c);
            ts.merge(s);
        }
    }
    let n = cfg.samples as f64;
    let se = 1.0 / n.sqrt();
    let mut probes = Vec::with_capacity(2 * cfg.probes.len());
    for (i, (u, (c, s))) in cfg.probes.iter().zip(&totals).enumerate() {
        let phi = analytic.characteristic_function(u, cfg.t)?;
        let label = format!("u{i} |u|={:.3}", u.norm());
        probes.push(Probe::within(
            format!("{label} re"),
            phi.re,
            c.value() / n,
            se,
            cfg.k * se,
        ));
        probes.push(Probe::within(
            format!("{label} im"),
            phi.im,
            s.value() / n,
            se,
            cfg.k * se,
        ));
    }
    Ok(VerificationReport::from_probes("cf", probes, seed, cfg.samples, start))
}
