use std::time::Instant;

use super::{Probe, VerificationReport, K_SIGMA};
use crate::error::{invalid, Result};
use crate::mc::{run_batches, SeedSchedule};
use crate::space::dot;
use crate::subordination::{QuadratureConfig, SubordinatedProcessSpec, TestSet};

/// Smallest radius accepted: below it counting depends on the grid.
pub const MIN_JUMP_RADIUS: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
pub struct JumpCheckConfig {
    /// Grid step `h` of the path increments.
    pub step: f64,
    /// Number of path increments (total simulated time `increments · step`).
    pub increments: usize,
    pub radii: Vec<f64>,
    pub k: f64,
    pub quadrature: QuadratureConfig,
}

impl JumpCheckConfig {
    pub fn new(radii: Vec<f64>) -> Self {
        Self {
            step: 1e-3,
            increments: 10_000_000,
            radii,
            k: K_SIGMA,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Number of increments `X((i+1)h) − X(ih)` with norm above each radius.
fn count_exceedances(
    spec: &SubordinatedProcessSpec,
    h: f64,
    n: usize,
    radii: &[f64],
    schedule: &SeedSchedule,
) -> Vec<u64> {
    let dim = spec.layout().total_dim();
    let d = spec.subordinator().components();
    let r2: Vec<f64> = radii.iter().map(|r| r * r).collect();
    let batches = run_batches(schedule, n, |rng, count| {
        let mut theta = vec![0.0; d];
        let mut x = vec![0.0; dim];
        let mut hits = vec![0u64; r2.len()];
        for _ in 0..count {
            spec.sample_into(rng, h, &mut theta, &mut x);
            let n2 = dot(&x, &x);
            for (c, r) in hits.iter_mut().zip(&r2) {
                *c += u64::from(n2 > *r);
            }
        }
        hits
    });
    let mut out = vec![0u64; radii.len()];
    for b in batches {
        for (o, c) in out.iter_mut().zip(b) {
            *o += c;
        }
    }
    out
}

/// Path-increment jump counting against the quadrature `μ({|x| > r})`.
///
/// Increments are i.i.d., so the grid of a path is simulated directly as
/// `increments` independent draws of `X(step)`. A second pass at step `2h`
/// (same total time) flags grid dependence exceeding one standard error.
pub fn check_jump_measure(
    spec: &SubordinatedProcessSpec,
    cfg: &JumpCheckConfig,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if let Some(r) = cfg.radii.iter().find(|r| !(**r >= MIN_JUMP_RADIUS && r.is_finite())) {
        return Err(invalid("radii", format!("radius {r} below {MIN_JUMP_RADIUS}")));
    }
    if !(cfg.step > 0.0 && cfg.step.is_finite()) || cfg.increments < 2 {
        return Err(invalid("step", "need step > 0 and at least two increments"));
    }
    let triplet = spec.triplet(&cfg.quadrature)?;
    let schedule = SeedSchedule::new(seed).derive("jumps");
    let h = cfg.step;
    let n = cfg.increments;
    let fine = count_exceedances(spec, h, n, &cfg.radii, &schedule.derive("fine"));
    let coarse = count_exceedances(spec, 2.0 * h, n / 2, &cfg.radii, &schedule.derive("coarse"));
    let time = n as f64 * h;
    let coarse_time = (n / 2) as f64 * 2.0 * h;

    let mut probes = Vec::new();
    let mut notes = Vec::new();
    for ((r, &hits), &hits2) in cfg.radii.iter().zip(&fine).zip(&coarse) {
        let mass = triplet.mu(&TestSet::BallComplement { radius: *r })?;
        let rate = hits as f64 / time;
        // Poisson SE with the analytic intensity, so zero counts are graded,
        // combined with the quadrature's Monte Carlo error.
        let se = (mass.value.max(rate) / time + mass.standard_error.powi(2)).sqrt();
        probes.push(Probe::within(
            format!("mu(|x|>{r})"),
            mass.value,
            rate,
            se,
            cfg.k * se + mass.gap,
        ));
        let rate2 = hits2 as f64 / coarse_time;
        let se2 = (rate.max(rate2) / time + rate.max(rate2) / coarse_time).sqrt();
        if (rate - rate2).abs() > se2 {
            notes.push(format!(
                "grid-resolution warning at r={r}: step {h} gives {rate:.6e}, step {} gives {rate2:.6e}",
                2.0 * h
            ));
        }
    }
    let mut report = VerificationReport::from_probes("jumps", probes, seed, n, start);
    report.notes = notes;
    Ok(report)
}
