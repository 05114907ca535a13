//! Statistical checks comparing simulation against the analytic formulas.
//!
//! Every check draws from seed-derived batch streams, so a report is a pure
//! function of `(spec, config, seed)`; only `runtime_seconds` varies between
//! runs.

mod cf;
mod growth;
mod jumps;
pub mod ks;
mod moments;
mod scaling;
mod tail;

pub use cf::{check_cf, check_cf_against, probe_grid, CfCheckConfig, MIN_CF_SAMPLES};
pub use growth::{check_growth_bounds, GrowthCheckConfig};
pub use jumps::{check_jump_measure, JumpCheckConfig, MIN_JUMP_RADIUS};
pub use moments::{check_moments, check_moments_against};
pub use scaling::{check_scaling, ScalingCheckConfig, MIN_SCALING_SAMPLES};
pub use tail::{check_tail_index, hill_index, TailCheckConfig, TailExpectation, MIN_TAIL_POINTS, NO_POWER_LAW_INDEX};

use serde::{Deserialize, Serialize};
use std::time::Instant;

use crate::mc::{run_batches, SeedSchedule};
use crate::space::TruncatedVector;
use crate::subordination::SubordinatedProcessSpec;

/// Default significance multiplier: deviations up to `K_SIGMA` standard
/// errors pass.
pub const K_SIGMA: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not enough information to decide (e.g. too few tail points).
    Inconclusive,
    /// Not applicable to the spec (e.g. moments of a non square integrable process).
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// `|analytic − empirical| ≤ tolerance`.
    Within,
    /// `empirical ≤ analytic + tolerance` (analytic is an upper bound).
    Below,
    /// `empirical > analytic − tolerance` (analytic is a lower threshold).
    Above,
}

/// One compared quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub label: String,
    pub kind: ProbeKind,
    pub analytic: f64,
    pub empirical: f64,
    pub standard_error: f64,
    /// Accepted deviation in the direction given by `kind`.
    pub tolerance: f64,
    pub pass: bool,
}

impl Probe {
    /// Two-sided comparison within `tolerance`.
    pub fn within(label: impl Into<String>, analytic: f64, empirical: f64, se: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            kind: ProbeKind::Within,
            analytic,
            empirical,
            standard_error: se,
            tolerance,
            pass: (analytic - empirical).abs() <= tolerance,
        }
    }

    /// One-sided: passes when `empirical <= bound + tolerance`.
    pub fn below(label: impl Into<String>, bound: f64, empirical: f64, se: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            kind: ProbeKind::Below,
            analytic: bound,
            empirical,
            standard_error: se,
            tolerance,
            pass: empirical <= bound + tolerance,
        }
    }

    /// One-sided: passes when `empirical > threshold − tolerance`.
    pub fn above(label: impl Into<String>, threshold: f64, empirical: f64, se: f64, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            kind: ProbeKind::Above,
            analytic: threshold,
            empirical,
            standard_error: se,
            tolerance,
            pass: empirical > threshold - tolerance,
        }
    }

    /// Deviation in units of the tolerance: at most 1 for passing probes
    /// with a positive tolerance, 0 for passing zero-tolerance probes.
    pub fn ratio(&self) -> f64 {
        let excess = match self.kind {
            ProbeKind::Within => (self.analytic - self.empirical).abs(),
            ProbeKind::Below => (self.empirical - self.analytic).max(0.0),
            ProbeKind::Above => (self.analytic - self.empirical).max(0.0),
        };
        if self.tolerance > 0.0 {
            excess / self.tolerance
        } else if self.pass {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub status: CheckStatus,
    pub probes: Vec<Probe>,
    pub notes: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    pub runtime_seconds: f64,
}

impl VerificationReport {
    pub(crate) fn from_probes(check: &str, probes: Vec<Probe>, seed: u64, samples: usize, start: Instant) -> Self {
        let status = if probes.iter().all(|p| p.pass) {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            check: check.to_string(),
            status,
            probes,
            notes: Vec::new(),
            seed,
            samples,
            runtime_seconds: start.elapsed().as_secs_f64(),
        }
    }

    pub(crate) fn skipped(check: &str, reason: String, seed: u64) -> Self {
        Self {
            check: check.to_string(),
            status: CheckStatus::Skipped,
            probes: Vec::new(),
            notes: vec![reason],
            seed,
            samples: 0,
            runtime_seconds: 0.0,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }

    /// The report with the run time zeroed, for reproducibility comparisons.
    pub fn without_runtime(&self) -> Self {
        Self {
            runtime_seconds: 0.0,
            ..self.clone()
        }
    }

    /// Largest [`Probe::ratio`] over the probes.
    pub fn worst_ratio(&self) -> f64 {
        self.probes.iter().map(Probe::ratio).fold(0.0, f64::max)
    }
}

/// `n` draws of `X(t)`, row-major (`n × total_dim`).
pub fn sample_matrix(spec: &SubordinatedProcessSpec, t: f64, n: usize, schedule: &SeedSchedule) -> Vec<f64> {
    let dim = spec.layout().total_dim();
    let d = spec.subordinator().components();
    run_batches(schedule, n, |rng, count| {
        let mut out = vec![0.0; count * dim];
        let mut theta = vec![0.0; d];
        for row in out.chunks_mut(dim) {
            spec.sample_into(rng, t, &mut theta, row);
        }
        out
    })
    .concat()
}

/// `n` draws of `⟨u|X(t)⟩` for each `u`, without storing full samples.
pub fn sample_projections(
    spec: &SubordinatedProcessSpec,
    t: f64,
    n: usize,
    directions: &[TruncatedVector],
    schedule: &SeedSchedule,
) -> Vec<Vec<f64>> {
    let dim = spec.layout().total_dim();
    let d = spec.subordinator().components();
    let batches = run_batches(schedule, n, |rng, count| {
        let mut out = vec![Vec::with_capacity(count); directions.len()];
        let mut theta = vec![0.0; d];
        let mut x = vec![0.0; dim];
        for _ in 0..count {
            spec.sample_into(rng, t, &mut theta, &mut x);
            for (o, u) in out.iter_mut().zip(directions) {
                o.push(crate::space::dot(u.as_slice(), &x));
            }
        }
        out
    });
    let mut out = vec![Vec::with_capacity(n); directions.len()];
    for batch in batches {
        for (o, b) in out.iter_mut().zip(batch) {
            o.extend(b);
        }
    }
    out
}

/// `count` unit vectors with seed-derived Gaussian directions.
pub fn random_directions(
    layout: &crate::space::SpaceLayout,
    count: usize,
    schedule: &SeedSchedule,
) -> Vec<TruncatedVector> {
    let mut rng = schedule.stream(0);
    (0..count)
        .map(|_| {
            let v: Vec<f64> = (0..layout.total_dim())
                .map(|_| crate::sampling::standard_normal(&mut rng))
                .collect();
            let u = TruncatedVector::from_flat(layout, v).expect("layout dimension");
            let n = u.norm();
            u.scaled(1.0 / n)
        })
        .collect()
}
