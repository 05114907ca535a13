use std::time::Instant;

use super::{ks, random_directions, sample_projections, Probe, VerificationReport};
use crate::error::{invalid, Result};
use crate::mc::SeedSchedule;
use crate::subordination::SubordinatedProcessSpec;

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCheckConfig {
    /// Claimed stability index.
    pub alpha: f64,
    pub t: f64,
    pub samples: usize,
    pub projections: usize,
    /// Family-wise level, split evenly over the projections.
    pub significance: f64,
}

impl ScalingCheckConfig {
    pub fn new(alpha: f64, t: f64, samples: usize) -> Self {
        Self {
            alpha,
            t,
            samples,
            projections: 3,
            significance: 0.01,
        }
    }
}

/// Floor that keeps the asymptotic KS distribution accurate.
pub const MIN_SCALING_SAMPLES: usize = 10_000;

/// Two-sample KS between `⟨u|X(t^α)⟩` and `t·⟨u|X(1)⟩` on random unit
/// projections; passes when every p-value exceeds `significance / projections`.
pub fn check_scaling(
    spec: &SubordinatedProcessSpec,
    cfg: &ScalingCheckConfig,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if !(cfg.alpha > 0.0 && cfg.alpha <= 2.0) {
        return Err(invalid("alpha", "must lie in (0, 2]"));
    }
    if !(cfg.t > 0.0 && cfg.t.is_finite()) {
        return Err(invalid("t", "must be finite and > 0"));
    }
    if cfg.samples < MIN_SCALING_SAMPLES {
        return Err(invalid(
            "samples",
            format!("scaling check needs at least {MIN_SCALING_SAMPLES} draws"),
        ));
    }
    if cfg.projections == 0 || !(cfg.significance > 0.0 && cfg.significance < 1.0) {
        return Err(invalid("projections", "need ≥ 1 projection and significance in (0, 1)"));
    }
    let schedule = SeedSchedule::new(seed).derive("scaling");
    let dirs = random_directions(spec.layout(), cfg.projections, &schedule.derive("directions"));
    let lhs = sample_projections(spec, cfg.t.powf(cfg.alpha), cfg.samples, &dirs, &schedule.derive("lhs"));
    let rhs = sample_projections(spec, 1.0, cfg.samples, &dirs, &schedule.derive("rhs"));
    let level = cfg.significance / cfg.projections as f64;
    let mut probes = Vec::new();
    let mut notes = Vec::new();
    for (i, (a, b)) in lhs.iter().zip(&rhs).enumerate() {
        let scaled: Vec<f64> = b.iter().map(|x| cfg.t * x).collect();
        let (d, p) = ks::two_sample(a, &scaled);
        // The p-value against the Bonferroni level; the KS distance is
        // kept in the standard-error slot.
        probes.push(Probe::above(format!("projection {i} KS p-value"), level, p, d, 0.0));
        notes.push(format!("projection {i}: D={d:.6e} p={p:.6e}"));
    }
    let mut report = VerificationReport::from_probes("scaling", probes, seed, cfg.samples, start);
    report.notes = notes;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Family, StableParams};
    use crate::space::{CovOperator, SpaceLayout};

    fn stable(alpha: f64) -> SubordinatedProcessSpec {
        let layout = SpaceLayout::single(2).unwrap();
        Family::Stable(StableParams {
            alpha,
            q: CovOperator::identity(&layout),
        })
        .spec()
        .unwrap()
    }

    #[test]
    fn unit_time_is_trivially_consistent() {
        let r = check_scaling(&stable(1.0), &ScalingCheckConfig::new(1.0, 1.0, 10_000), 1).unwrap();
        assert!(r.passed(), "{r:#?}");
    }

    #[test]
    fn cauchy_scaling_passes() {
        let r = check_scaling(&stable(1.0), &ScalingCheckConfig::new(1.0, 2.0, 20_000), 2).unwrap();
        assert!(r.passed(), "{r:#?}");
    }

    #[test]
    fn gaussian_with_wrong_index_fails() {
        let r = check_scaling(&stable(2.0), &ScalingCheckConfig::new(1.0, 2.0, 20_000), 3).unwrap();
        assert!(r.failed(), "{r:#?}");
    }

    #[test]
    fn small_sample_rejected() {
        assert!(check_scaling(&stable(1.0), &ScalingCheckConfig::new(1.0, 2.0, 100), 0).is_err());
    }
}
