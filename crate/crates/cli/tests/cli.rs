use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const HNIG_1D: &str = r#"
[spec]
family = "hnig"
layout = [1]
s = 1.0
c = 1.0
b = [0.0]
q.diagonal = [[1.0]]

[run]
seed = 11
samples = 10
"#;

const HNIG_DESK: &str = r#"
[spec]
family = "hnig"
layout = [2]
s = 1.0
c = 1.0
b = [0.5, 0.0]
q.diagonal = [[1.0, 0.5]]

[run]
seed = 12
samples = 50000

[checks]
enabled = ["cf", "moments", "growth", "jumps"]

[checks.jumps]
radii = [0.5, 1.0]
increments = 1000000
"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sublevy"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exponent_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", HNIG_1D);
    let o = run(&["exponent", "--config", path_str(&cfg), "--u", "0", "--u", "1"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][2].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), 0.0);
    let re: f64 = rows[1][2].parse().unwrap();
    assert!((re - (1.0 - 2f64.sqrt())).abs() < 1e-15, "{re}");

    let o = run(&["exponent", "--config", path_str(&cfg), "--u", "-1", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v[0]["im"], 0.0);
}

#[test]
fn exponent_dimension_mismatch_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", HNIG_1D);
    let o = run(&["exponent", "--config", path_str(&cfg), "--u", "0", "--u", "1,2"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty(), "partial output: {}", stdout(&o));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension"));
}

#[test]
fn malformed_and_missing_configs() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("syntax.toml", "[spec\nfamily = 1"),
        (
            "unknown.toml",
            &HNIG_1D.replace("samples = 10", "samples = 10\nsample = 3"),
        ),
        ("noseed.toml", &HNIG_1D.replace("seed = 11", "")),
        ("badparam.toml", &HNIG_1D.replace("c = 1.0", "c = -1.0")),
    ] {
        let cfg = write_config(dir.path(), name, text);
        for cmd in ["exponent", "simulate", "verify", "classify"] {
            let o = run(&[
                cmd,
                "--config",
                path_str(&cfg),
                "--out",
                path_str(&dir.path().join("o")),
            ]);
            assert_eq!(code(&o), 2, "{name} {cmd}: {o:?}");
            assert!(o.stdout.is_empty(), "{name} {cmd}");
        }
    }
    assert!(!dir.path().join("o").exists());
    let o = run(&["classify", "--config", path_str(&dir.path().join("absent.toml"))]);
    assert_eq!(code(&o), 3);
}

#[test]
fn simulate_rows_and_determinism() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", HNIG_1D);
    let sim = |seed: &str, out: &str| {
        let out = dir.path().join(out);
        let o = run(&[
            "simulate",
            "--config",
            path_str(&cfg),
            "--seed",
            seed,
            "--out",
            path_str(&out),
        ]);
        assert_eq!(code(&o), 0, "{o:?}");
        fs::read_to_string(out.join("samples.csv")).unwrap()
    };
    let a = sim("5", "a");
    let b = sim("5", "b");
    let c = sim("6", "c");
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "sample_id,component,coeff_index,value");
    assert_eq!(lines.len(), 11);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(c.lines().count(), 11);
    assert_eq!(c.lines().next(), lines.first().copied());
    for l in &lines[1..] {
        let v: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
        assert!(v.is_finite());
    }
    assert!(dir.path().join("a/samples.json").exists());
}

#[test]
fn simulate_path_on_grid() {
    let dir = TempDir::new().unwrap();
    let text = HNIG_1D.replace("samples = 10", "grid = [0.0, 0.5, 1.0, 1.5]");
    let cfg = write_config(dir.path(), "c.toml", &text);
    let out = dir.path().join("o");
    let o = run(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&out),
        "--format",
        "csv",
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let csv = fs::read_to_string(out.join("path.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,component,coeff_index,value");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].ends_with(",0,0,0.0000000000000000e0"), "{}", lines[1]);
    assert!(!out.join("path.json").exists());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", HNIG_1D);
    let blocker = write_config(dir.path(), "file", "");
    let o = run(&[
        "simulate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&blocker.join("sub")),
    ]);
    assert_eq!(code(&o), 3, "{o:?}");
}

#[test]
fn verify_battery_passes_and_reruns_from_report() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.toml", HNIG_DESK);
    let out = dir.path().join("a");
    let o = run(&["verify", "--config", path_str(&cfg), "--out", path_str(&out)]);
    let text = stdout(&o);
    assert_eq!(code(&o), 0, "{text}");
    for check in [
        "cf: pass",
        "moments: pass",
        "growth: pass",
        "jumps: pass",
        "verify: pass",
    ] {
        assert!(text.contains(check), "{check} missing in {text}");
    }
    let report = out.join("report.json");
    assert!(out.join("report.csv").exists());

    let again = dir.path().join("b");
    let o = run(&[
        "verify",
        "--config",
        path_str(&report),
        "--out",
        path_str(&again),
        "--threads",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{o:?}");
    let strip = |p: &Path| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v["runtime_seconds"] = 0.0.into();
        v["config"]["output"]["dir"] = "".into();
        for c in v["checks"].as_array_mut().unwrap() {
            c["runtime_seconds"] = 0.0.into();
        }
        v
    };
    assert_eq!(strip(&report), strip(&again.join("report.json")));
}

#[test]
fn corrupted_parameter_fails_verification() {
    let dir = TempDir::new().unwrap();
    let text = r#"
[spec]
family = "hnig"
layout = [2]
s = 1.0
c = 1.0
b = [0.5, 0.0]
q.diagonal = [[1.0, 0.5]]

# Analytic side with s off by 10%.
[analytic]
family = "hnig"
layout = [2]
s = 1.1
c = 1.0
b = [0.5, 0.0]
q.diagonal = [[1.0, 0.5]]

[run]
seed = 12
samples = 50000

[checks]
enabled = ["cf", "moments"]
"#;
    let cfg = write_config(dir.path(), "c.toml", text);
    let o = run(&[
        "verify",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("verify: fail"));
    assert!(stdout(&o).contains("moments: fail"), "{}", stdout(&o));
}

#[test]
fn moment_check_skipped_for_cauchy_stable() {
    let dir = TempDir::new().unwrap();
    let text = r#"
[spec]
family = "stable"
layout = [1]
alpha = 1.0
q.diagonal = [[1.0]]

[run]
seed = 13
samples = 20000

[checks]
enabled = ["moments", "scaling"]
"#;
    let cfg = write_config(dir.path(), "c.toml", text);
    let o = run(&[
        "verify",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&dir.path().join("o")),
    ]);
    let text = stdout(&o);
    assert_eq!(code(&o), 0, "{text}");
    assert!(
        text.contains("moments: skipped: not square integrable per classification"),
        "{text}"
    );
    assert!(text.contains("scaling: pass"), "{text}");
}

#[test]
fn classify_verdicts() {
    let dir = TempDir::new().unwrap();
    let cases = [
        (HNIG_1D.replace("b = [0.0]", "b = [0.5]"), "square integrable, case (1)"),
        (HNIG_1D.replace("c = 1.0", "c = 0.0"), "not integrable"),
        (
            r#"
[spec]
family = "explicit"
layout = [1]
base = { drift = [0.3], q.diagonal = [[1.0]] }
subordinator = {}

[run]
seed = 1
"#
            .to_string(),
            "case (3): Θ = 0 a.s.",
        ),
    ];
    for (i, (text, want)) in cases.iter().enumerate() {
        let cfg = write_config(dir.path(), &format!("c{i}.toml"), text);
        let o = run(&["classify", "--config", path_str(&cfg)]);
        assert_eq!(code(&o), 0, "{o:?}");
        assert!(
            stdout(&o).starts_with(&format!("component 0: {want}")),
            "{}",
            stdout(&o)
        );
        let o = run(&["classify", "--config", path_str(&cfg), "--format", "json"]);
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v["components"][0]["case"].is_string());
    }
}

#[test]
fn shipped_configs_classify() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let o = run(&["classify", "--config", path_str(&p)]);
            assert_eq!(code(&o), 0, "{}: {o:?}", p.display());
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
