use std::time::Instant;

use super::{random_directions, sample_projections, CheckStatus, Probe, VerificationReport};
use crate::error::{invalid, Result};
use crate::mc::SeedSchedule;
use crate::space::TruncatedVector;
use crate::subordination::SubordinatedProcessSpec;

/// Hill estimates above this are read as "no power-law tail": exponentially
/// decaying tails push the estimate up without bound as the sample grows.
pub const NO_POWER_LAW_INDEX: f64 = 4.0;

/// Fewer tail order statistics than this leaves the check inconclusive.
pub const MIN_TAIL_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailExpectation {
    /// Power-law tail with index in `[lo, hi]`.
    Index {
        lo: f64,
        hi: f64,
    },
    NoPowerLaw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailCheckConfig {
    pub samples: usize,
    pub top_fraction: f64,
    /// Projection direction; random unit vector when `None`.
    pub direction: Option<TruncatedVector>,
    pub expectation: TailExpectation,
}

impl TailCheckConfig {
    pub fn new(samples: usize, top_fraction: f64, expectation: TailExpectation) -> Self {
        Self {
            samples,
            top_fraction,
            direction: None,
            expectation,
        }
    }
}

/// Hill estimator of the tail index from the `k` largest of `values`
/// (absolute values are taken). `None` if `k` is 0 or exceeds the sample.
pub fn hill_index(values: &[f64], k: usize) -> Option<f64> {
    if k == 0 || k >= values.len() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    let threshold = v[k];
    if threshold <= 0.0 {
        return None;
    }
    let h = v[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    Some(1.0 / h)
}

/// Tail index of `|⟨u|X(1)⟩|` from the top order statistics.
pub fn check_tail_index(
    spec: &SubordinatedProcessSpec,
    cfg: &TailCheckConfig,
    seed: u64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    if !(cfg.top_fraction > 0.0 && cfg.top_fraction < 1.0) {
        return Err(invalid("top_fraction", "must lie in (0, 1)"));
    }
    let schedule = SeedSchedule::new(seed).derive("tail");
    let u = match &cfg.direction {
        Some(u) => {
            spec.layout().ensure_same(u.layout())?;
            if u.is_zero() {
                return Err(invalid("direction", "must be nonzero"));
            }
            u.clone()
        }
        None => random_directions(spec.layout(), 1, &schedule.derive("direction")).remove(0),
    };
    let k = (cfg.top_fraction * cfg.samples as f64).floor() as usize;
    if k < MIN_TAIL_POINTS {
        return Ok(VerificationReport {
            status: CheckStatus::Inconclusive,
            notes: vec![format!("inconclusive: {k} tail points < {MIN_TAIL_POINTS}")],
            samples: cfg.samples,
            ..VerificationReport::skipped("tail", String::new(), seed)
        });
    }
    let x = sample_projections(spec, 1.0, cfg.samples, &[u], &schedule.derive("samples")).remove(0);
    let Some(index) = hill_index(&x, k) else {
        return Ok(VerificationReport {
            status: CheckStatus::Inconclusive,
            notes: vec![format!("inconclusive: order statistic {k} is zero")],
            samples: cfg.samples,
            ..VerificationReport::skipped("tail", String::new(), seed)
        });
    };
    let se = index / (k as f64).sqrt();
    let probe = match cfg.expectation {
        TailExpectation::Index { lo, hi } => Probe::within("hill index", 0.5 * (lo + hi), index, se, 0.5 * (hi - lo)),
        TailExpectation::NoPowerLaw => Probe::above(
            "hill index above no-power-law threshold",
            NO_POWER_LAW_INDEX,
            index,
            se,
            0.0,
        ),
    };
    let mut report = VerificationReport::from_probes("tail", vec![probe], seed, cfg.samples, start);
    report
        .notes
        .push(format!("hill index {index:.4} from top {k} of {} draws", cfg.samples));
    if index > NO_POWER_LAW_INDEX {
        report.notes.push("no power-law tail".into());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Pareto};

    #[test]
    fn hill_recovers_pareto_index() {
        // Independent oracle: exact Pareto(1, 1.5) draws.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let d = Pareto::new(1.0, 1.5).unwrap();
        let x: Vec<f64> = (0..100_000).map(|_| d.sample(&mut rng)).collect();
        let h = hill_index(&x, 1000).unwrap();
        assert!((h - 1.5).abs() < 0.15, "{h}");
    }

    #[test]
    fn hill_rejects_degenerate_k() {
        assert_eq!(hill_index(&[1.0, 2.0], 0), None);
        assert_eq!(hill_index(&[1.0, 2.0], 2), None);
    }

    #[test]
    fn too_few_points_is_inconclusive() {
        use crate::families::{Family, HnigParams};
        use crate::space::{CovOperator, SpaceLayout};
        let layout = SpaceLayout::single(1).unwrap();
        let spec = Family::Hnig(HnigParams {
            s: 1.0,
            c: 1.0,
            b: TruncatedVector::zeros(&layout),
            q: CovOperator::identity(&layout),
        })
        .spec()
        .unwrap();
        let cfg = TailCheckConfig::new(1000, 0.01, TailExpectation::NoPowerLaw);
        let r = check_tail_index(&spec, &cfg, 0).unwrap();
        assert_eq!(r.status, CheckStatus::Inconclusive);
    }
}
