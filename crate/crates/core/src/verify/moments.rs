use std::time::Instant;

use super::{sample_matrix, Probe, VerificationReport};
use crate::error::{invalid, Result};
use crate::mc::{MeanAccumulator, SeedSchedule};
use crate::subordination::SubordinatedProcessSpec;

/// Empirical mean vector and covariance matrix of `X(1)` against the
/// analytic formulas, entry by entry within `k` standard errors.
pub fn check_moments(spec: &SubordinatedProcessSpec, samples: usize, k: f64, seed: u64) -> Result<VerificationReport> {
    check_moments_against(spec, spec, samples, k, seed)
}

pub fn check_moments_against(
    sampler: &SubordinatedProcessSpec,
    analytic: &SubordinatedProcessSpec,
    samples: usize,
    k: f64,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let report = analytic.classify();
    if !report.x_square_integrable {
        let c = report
            .components
            .iter()
            .find(|c| !c.square_integrable)
            .expect("some component");
        return Ok(VerificationReport::skipped(
            "moments",
            format!("skipped: not square integrable per classification ({})", c.case.label()),
            seed,
        ));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two draws"));
    }
    sampler.layout().ensure_same(analytic.layout())?;
    let mean = analytic.mean()?;
    let cov = analytic.covariance()?.to_dense();
    let dim = analytic.layout().total_dim();

    let schedule = SeedSchedule::new(seed).derive("moments");
    let x = sample_matrix(sampler, 1.0, samples, &schedule);
    let mut means = vec![MeanAccumulator::default(); dim];
    for row in x.chunks(dim) {
        for (m, v) in means.iter_mut().zip(row) {
            m.push(*v);
        }
    }
    let centre: Vec<f64> = means.iter().map(|m| m.mean()).collect();
    let mut probes = Vec::new();
    for (a, m) in means.iter().enumerate() {
        let se = m.standard_error();
        probes.push(Probe::within(
            format!("mean[{a}]"),
            mean.as_slice()[a],
            m.mean(),
            se,
            k * se,
        ));
    }
    for a in 0..dim {
        for b in a..dim {
            let mut acc = MeanAccumulator::default();
            for row in x.chunks(dim) {
                acc.push((row[a] - centre[a]) * (row[b] - centre[b]));
            }
            let n = samples as f64;
            let empirical = acc.mean() * n / (n - 1.0);
            let se = acc.standard_error();
            probes.push(Probe::within(
                format!("cov[{a},{b}]"),
                cov[a * dim + b],
                empirical,
                se,
                k * se,
            ));
        }
    }
    Ok(VerificationReport::from_probes("moments", probes, seed, samples, start))
}
