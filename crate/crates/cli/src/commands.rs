use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sublevy::mc::SeedSchedule;
use sublevy::verify::{
    check_cf_against, check_growth_bounds, check_jump_measure, check_moments_against, check_scaling, check_tail_index,
    probe_grid, sample_matrix, CfCheckConfig, GrowthCheckConfig, JumpCheckConfig, ScalingCheckConfig, TailCheckConfig,
    TailExpectation, VerificationReport, K_SIGMA,
};
use sublevy::{Family, SpaceLayout, SubordinatedProcessSpec, TruncatedVector};

use crate::config::{CheckId, ExperimentConfig, Format, TailExpect};
use crate::error::CliError;

/// One JSON document per battery run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<VerificationReport>,
    pub runtime_seconds: f64,
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `(component, coeff_index)` of every flat coordinate.
fn coordinates(layout: &SpaceLayout) -> Vec<(usize, usize)> {
    (0..layout.components())
        .flat_map(|j| (0..layout.dim(j)).map(move |k| (j, k)))
        .collect()
}

pub fn exponent(cfg: &ExperimentConfig, probes: &[Vec<f64>], format: Format) -> Result<String, CliError> {
    let spec = cfg.spec.build()?;
    let layout = spec.layout().clone();
    let probes: Vec<Vec<f64>> = if !probes.is_empty() {
        probes.to_vec()
    } else if !cfg.run.probes.is_empty() {
        cfg.run.probes.clone()
    } else {
        let mut out = vec![vec![0.0; layout.total_dim()]];
        for i in 0..layout.total_dim() {
            let mut e = vec![0.0; layout.total_dim()];
            e[i] = 1.0;
            out.push(e);
        }
        out
    };
    // Everything is evaluated before anything is printed.
    let mut rows = Vec::with_capacity(probes.len());
    for u in &probes {
        if u.len() != layout.total_dim() {
            return Err(CliError::Config(format!(
                "probe has {} entries, the space has dimension {}",
                u.len(),
                layout.total_dim()
            )));
        }
        let v = TruncatedVector::from_flat(&layout, u.clone())?;
        rows.push((u.clone(), spec.exponent(&v)?));
    }
    Ok(match format {
        Format::Csv => {
            let mut s = String::from("probe,u,re,im\n");
            for (i, (u, rho)) in rows.iter().enumerate() {
                let u: Vec<String> = u.iter().map(|x| float(*x)).collect();
                writeln!(s, "{i},{},{},{}", u.join(";"), float(rho.re), float(rho.im)).unwrap();
            }
            s
        }
        Format::Json => {
            let v: Vec<serde_json::Value> = rows
                .iter()
                .map(|(u, rho)| serde_json::json!({ "u": u, "re": rho.re, "im": rho.im }))
                .collect();
            serde_json::to_string_pretty(&v).unwrap() + "\n"
        }
    })
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, CliError> {
    fs::write(&path, contents).map_err(CliError::io(&path))?;
    Ok(path)
}

/// Writes i.i.d. draws of `X(t)`, or one path when a grid is configured.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>, CliError> {
    let spec = cfg.spec.build()?;
    let layout = spec.layout().clone();
    let coords = coordinates(&layout);
    let schedule = SeedSchedule::new(cfg.run.seed).derive("simulate");
    ensure_dir(&cfg.output.dir)?;
    let mut written = Vec::new();
    match &cfg.run.grid {
        None => {
            let n = cfg.run.samples;
            let x = sample_matrix(&spec, cfg.run.t, n, &schedule);
            let dim = layout.total_dim();
            for f in &cfg.output.formats {
                match f {
                    Format::Csv => {
                        let mut s = String::from("sample_id,component,coeff_index,value\n");
                        for (i, row) in x.chunks(dim).enumerate() {
                            for ((j, k), v) in coords.iter().zip(row) {
                                writeln!(s, "{i},{j},{k},{}", float(*v)).unwrap();
                            }
                        }
                        written.push(write(cfg.output.dir.join("samples.csv"), &s)?);
                    }
                    Format::Json => {
                        let rows: Vec<&[f64]> = x.chunks(dim).collect();
                        let doc = serde_json::json!({
                            "seed": cfg.run.seed,
                            "t": cfg.run.t,
                            "layout": layout.dims(),
                            "samples": rows,
                        });
                        written.push(write(cfg.output.dir.join("samples.json"), &(doc.to_string() + "\n"))?);
                    }
                }
            }
        }
        Some(grid) => {
            let path = spec.simulate_path(&mut schedule.stream(0), grid)?;
            for f in &cfg.output.formats {
                match f {
                    Format::Csv => {
                        let mut s = String::from("t,component,coeff_index,value\n");
                        for (t, x) in grid.iter().zip(&path) {
                            for ((j, k), v) in coords.iter().zip(x.as_slice()) {
                                writeln!(s, "{},{j},{k},{}", float(*t), float(*v)).unwrap();
                            }
                        }
                        written.push(write(cfg.output.dir.join("path.csv"), &s)?);
                    }
                    Format::Json => {
                        let values: Vec<&[f64]> = path.iter().map(|x| x.as_slice()).collect();
                        let doc = serde_json::json!({
                            "seed": cfg.run.seed,
                            "grid": grid,
                            "layout": layout.dims(),
                            "values": values,
                        });
                        written.push(write(cfg.output.dir.join("path.json"), &(doc.to_string() + "\n"))?);
                    }
                }
            }
        }
    }
    Ok(written)
}

fn tail_expectation(cfg: &ExperimentConfig, spec: &SubordinatedProcessSpec) -> Result<TailExpectation, CliError> {
    if let Some(e) = &cfg.checks.tail.expect {
        return Ok(match *e {
            TailExpect::NoPowerLaw => TailExpectation::NoPowerLaw,
            TailExpect::Index { lo, hi } => TailExpectation::Index { lo, hi },
        });
    }
    match cfg.spec.family()? {
        Some(Family::Stable(p)) if p.alpha < 2.0 => Ok(TailExpectation::Index {
            lo: p.alpha - 0.2,
            hi: p.alpha + 0.2,
        }),
        Some(Family::Hnig(p)) if p.c == 0.0 => Ok(TailExpectation::Index { lo: 0.8, hi: 1.2 }),
        _ if spec.classify().x_square_integrable => Ok(TailExpectation::NoPowerLaw),
        _ => Err(CliError::Config("checks.tail.expect is required for this spec".into())),
    }
}

fn run_check(
    id: CheckId,
    cfg: &ExperimentConfig,
    spec: &SubordinatedProcessSpec,
    analytic: &SubordinatedProcessSpec,
) -> Result<VerificationReport, CliError> {
    let root = SeedSchedule::new(cfg.run.seed);
    let seed = root.derive(id.name()).seed();
    let c = &cfg.checks;
    let n = cfg.run.samples;
    Ok(match id {
        CheckId::Cf => {
            let probes = probe_grid(
                spec.layout(),
                c.cf.probes.unwrap_or(20),
                c.cf.max_radius.unwrap_or(3.0),
                &root.derive("cf-probes"),
            );
            let mut cc = CfCheckConfig::new(probes, c.cf.samples.unwrap_or(n));
            cc.t = cfg.run.t;
            cc.k = c.cf.k.unwrap_or(K_SIGMA);
            check_cf_against(spec, analytic, &cc, seed)?
        }
        CheckId::Moments => check_moments_against(
            spec,
            analytic,
            c.moments.samples.unwrap_or(n),
            c.moments.k.unwrap_or(K_SIGMA),
            seed,
        )?,
        CheckId::Scaling => {
            let alpha = match (c.scaling.alpha, cfg.spec.family()?) {
                (Some(a), _) => a,
                (None, Some(Family::Stable(p))) => p.alpha,
                _ => {
                    return Err(CliError::Config(
                        "checks.scaling.alpha is required for non-stable specs".into(),
                    ))
                }
            };
            let mut sc = ScalingCheckConfig::new(alpha, c.scaling.t.unwrap_or(2.0), c.scaling.samples.unwrap_or(n));
            if let Some(s) = c.scaling.significance {
                sc.significance = s;
            }
            check_scaling(spec, &sc, seed)?
        }
        CheckId::Tail => {
            let tc = TailCheckConfig::new(
                c.tail.samples.unwrap_or(n),
                c.tail.top_fraction.unwrap_or(0.01),
                tail_expectation(cfg, spec)?,
            );
            check_tail_index(spec, &tc, seed)?
        }
        CheckId::Growth => {
            let d = spec.subordinator().components();
            let thetas = c
                .growth
                .thetas
                .clone()
                .unwrap_or_else(|| [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|&a| vec![a; d]).collect());
            check_growth_bounds(
                spec.base(),
                &GrowthCheckConfig::new(thetas, c.growth.samples.unwrap_or(n)),
                seed,
            )?
        }
        CheckId::Jumps => {
            let mut jc = JumpCheckConfig::new(c.jumps.radii.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]));
            jc.increments = c.jumps.increments.unwrap_or(1_000_000);
            if let Some(h) = c.jumps.step {
                jc.step = h;
            }
            check_jump_measure(spec, &jc, seed)?
        }
    })
}

pub fn verify(cfg: &ExperimentConfig) -> Result<BatteryReport, CliError> {
    let start = Instant::now();
    let spec = cfg.spec.build()?;
    let analytic = cfg.analytic_spec()?;
    let mut checks = Vec::with_capacity(cfg.checks.enabled.len());
    for &id in &cfg.checks.enabled {
        checks.push(run_check(id, cfg, &spec, &analytic)?);
    }
    Ok(BatteryReport {
        config: cfg.clone(),
        seed: cfg.run.seed,
        passed: checks.iter().all(|r| !r.failed()),
        checks,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// One line per check plus a verdict line.
pub fn summary(report: &BatteryReport) -> String {
    let mut s = String::new();
    for r in &report.checks {
        let status = serde_json::to_value(r.status).unwrap();
        let status = status.as_str().unwrap_or_default();
        if status == "skipped" || status == "inconclusive" {
            let note = r.notes.first().map(String::as_str).unwrap_or(status);
            let note = if note.starts_with(status) {
                note.to_string()
            } else {
                format!("{status}: {note}")
            };
            writeln!(s, "{}: {note}", r.check).unwrap();
        } else {
            writeln!(
                s,
                "{}: {status} ({} probes, worst ratio {:.3})",
                r.check,
                r.probes.len(),
                r.worst_ratio()
            )
            .unwrap();
        }
    }
    writeln!(s, "verify: {}", if report.passed { "pass" } else { "fail" }).unwrap();
    s
}

pub fn write_report(cfg: &ExperimentConfig, report: &BatteryReport) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(&cfg.output.dir)?;
    let mut written = vec![write(
        cfg.output.dir.join("report.json"),
        &(serde_json::to_string_pretty(report).unwrap() + "\n"),
    )?];
    if cfg.output.formats.contains(&Format::Csv) {
        let mut s = String::from("check,probe,analytic,empirical,standard_error,tolerance,pass\n");
        for r in &report.checks {
            for p in &r.probes {
                writeln!(
                    s,
                    "{},\"{}\",{},{},{},{},{}",
                    r.check,
                    p.label.replace('"', "'"),
                    float(p.analytic),
                    float(p.empirical),
                    float(p.standard_error),
                    float(p.tolerance),
                    p.pass
                )
                .unwrap();
            }
        }
        written.push(write(cfg.output.dir.join("report.csv"), &s)?);
    }
    Ok(written)
}

pub fn classify(cfg: &ExperimentConfig, format: Format) -> Result<String, CliError> {
    let report = cfg.spec.build()?.classify();
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&report).unwrap() + "\n",
        Format::Csv => {
            let mut s = String::new();
            for c in &report.components {
                writeln!(s, "component {}: {} ({})", c.component, c.case.label(), c.reason).unwrap();
            }
            writeln!(
                s,
                "X: {} (integrable: {}, mean zero: {}, square integrable: {})",
                report.summary(),
                report.x_integrable,
                report.x_mean_zero,
                report.x_square_integrable
            )
            .unwrap();
            s
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::parse_toml(&format!(
            r#"
[spec]
family = "hnig"
layout = [1]
s = 1.0
c = 1.0
b = [0.0]
q.diagonal = [[1.0]]

[run]
seed = 3
{extra}
"#
        ))
        .unwrap()
    }

    #[test]
    fn exponent_reference_row() {
        let out = exponent(&cfg(""), &[vec![0.0], vec![1.0]], Format::Csv).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "probe,u,re,im");
        assert!(
            lines[1].ends_with(",0.0000000000000000e0,0.0000000000000000e0"),
            "{}",
            lines[1]
        );
        let re: f64 = lines[2].split(',').nth(2).unwrap().parse().unwrap();
        assert!((re - (1.0 - 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn exponent_rejects_wrong_dimension() {
        assert!(matches!(
            exponent(&cfg(""), &[vec![0.0, 1.0]], Format::Csv),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn classify_lines() {
        let out = classify(&cfg(""), Format::Csv).unwrap();
        assert!(
            out.starts_with("component 0: mean zero and square integrable, case (2)"),
            "{out}"
        );
        let mut c = cfg("");
        if let crate::config::SpecConfig::Hnig { b, .. } = &mut c.spec {
            b[0] = 0.5;
        }
        let out = classify(&c, Format::Csv).unwrap();
        assert!(out.starts_with("component 0: square integrable, case (1)"), "{out}");
    }
}
