use sublevy::verify::{
    check_cf, check_jump_measure, check_moments, check_moments_against, check_scaling, check_tail_index, probe_grid,
    CfCheckConfig, CheckStatus, JumpCheckConfig, ScalingCheckConfig, TailCheckConfig, TailExpectation,
};
use sublevy::{
    BaseProcessSpec, CovOperator, Family, HnigParams, HvgParams, SeedSchedule, SpaceLayout, StableParams,
    SubordinatedProcessSpec, SubordinatorSpec, TruncatedVector,
};

fn hnig(s: f64) -> SubordinatedProcessSpec {
    let l = SpaceLayout::single(2).unwrap();
    Family::Hnig(HnigParams {
        s,
        c: 1.0,
        b: TruncatedVector::from_flat(&l, vec![0.5, 0.0]).unwrap(),
        q: CovOperator::diagonal(&l, vec![vec![1.0, 0.5]]).unwrap(),
    })
    .spec()
    .unwrap()
}

fn stable(alpha: f64) -> SubordinatedProcessSpec {
    let l = SpaceLayout::single(2).unwrap();
    Family::Stable(StableParams {
        alpha,
        q: CovOperator::diagonal(&l, vec![vec![1.0, 0.5]]).unwrap(),
    })
    .spec()
    .unwrap()
}

fn cf_config(spec: &SubordinatedProcessSpec) -> CfCheckConfig {
    let probes = probe_grid(spec.layout(), 8, 2.0, &SeedSchedule::new(1).derive("probes"));
    CfCheckConfig::new(probes, 20_000)
}

#[test]
fn reports_are_reproducible() {
    let spec = hnig(1.0);
    let cfg = cf_config(&spec);
    let a = check_cf(&spec, &cfg, 51).unwrap().without_runtime();
    let b = check_cf(&spec, &cfg, 51).unwrap().without_runtime();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let c = check_cf(&spec, &cfg, 52).unwrap().without_runtime();
    assert_ne!(a.probes, c.probes);

    let m1 = check_moments(&spec, 10_000, 4.0, 53).unwrap().without_runtime();
    let m2 = check_moments(&spec, 10_000, 4.0, 53).unwrap().without_runtime();
    assert_eq!(m1, m2);

    let st = stable(1.5);
    let s1 = check_scaling(&st, &ScalingCheckConfig::new(1.5, 2.0, 10_000), 54).unwrap();
    let s2 = check_scaling(&st, &ScalingCheckConfig::new(1.5, 2.0, 10_000), 54).unwrap();
    assert_eq!(s1.without_runtime(), s2.without_runtime());
}

#[test]
fn cf_anchor_at_origin_is_exact() {
    let spec = hnig(1.0);
    let r = check_cf(&spec, &cf_config(&spec), 55).unwrap();
    assert!(r.passed(), "{r:#?}");
    let (re, im) = (&r.probes[0], &r.probes[1]);
    assert_eq!((re.analytic, re.empirical), (1.0, 1.0));
    assert_eq!((im.analytic, im.empirical), (0.0, 0.0));
}

#[test]
fn perturbed_moments_are_rejected() {
    let r = check_moments_against(&hnig(1.0), &hnig(1.1), 100_000, 4.0, 56).unwrap();
    assert_eq!(r.status, CheckStatus::Fail, "{r:#?}");
    assert!(check_moments(&hnig(1.0), 100_000, 4.0, 56).unwrap().passed());
}

#[test]
fn moments_skipped_for_heavy_tails() {
    let r = check_moments(&stable(1.0), 10_000, 4.0, 57).unwrap();
    assert_eq!(r.status, CheckStatus::Skipped);
    assert!(!r.failed());
    assert!(r.notes.iter().any(|n| n.contains("classification")), "{:?}", r.notes);
}

#[test]
fn gaussian_has_wrong_scaling_index() {
    let l = SpaceLayout::single(2).unwrap();
    let base = BaseProcessSpec::gaussian(TruncatedVector::zeros(&l), CovOperator::identity(&l)).unwrap();
    let spec = SubordinatedProcessSpec::new(base, SubordinatorSpec::pure_drift(vec![1.0]).unwrap()).unwrap();
    let r = check_scaling(&spec, &ScalingCheckConfig::new(1.0, 2.0, 20_000), 58).unwrap();
    assert_eq!(r.status, CheckStatus::Fail);
    assert!(check_scaling(&spec, &ScalingCheckConfig::new(2.0, 2.0, 20_000), 58)
        .unwrap()
        .passed());
}

#[test]
fn tail_index_of_stable_and_gaussian() {
    let r = check_tail_index(
        &stable(1.5),
        &TailCheckConfig::new(300_000, 0.01, TailExpectation::Index { lo: 1.3, hi: 1.7 }),
        59,
    )
    .unwrap();
    assert!(r.passed(), "{r:#?}");
    let r = check_tail_index(
        &stable(2.0),
        &TailCheckConfig::new(300_000, 0.01, TailExpectation::NoPowerLaw),
        60,
    )
    .unwrap();
    assert!(r.passed(), "{r:#?}");
    assert!(r.notes.iter().any(|n| n.contains("no power-law tail")));
}

#[test]
fn hvg_jump_counts_match_levy_measure() {
    let l = SpaceLayout::single(2).unwrap();
    let spec = Family::Hvg(HvgParams {
        a: 2.0,
        b: TruncatedVector::from_flat(&l, vec![0.3, -0.2]).unwrap(),
        q: CovOperator::diagonal(&l, vec![vec![1.0, 0.5]]).unwrap(),
    })
    .spec()
    .unwrap();
    let mut cfg = JumpCheckConfig::new(vec![0.5]);
    cfg.increments = 4_000_000;
    let r = check_jump_measure(&spec, &cfg, 61).unwrap();
    assert!(r.passed(), "{r:#?}");
}
