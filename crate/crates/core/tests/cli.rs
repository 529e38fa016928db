use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_shocklab");

/// Fresh scratch directory for one test.
fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("shocklab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("SHOCKLAB_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

/// The only run directory under `out`.
fn run_dir(out: &Path) -> PathBuf {
    let dirs: Vec<PathBuf> = fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

const SMALL_PROFILE_RUN: &str = "
[perturbation]
amplitude = 0.0

[grid]
half_length = 100.0
n1 = 1024
n2 = 4
n3 = 4

[time]
t_end = 0.5
";

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(run(&[], &[]).status.code(), Some(1));
    assert_eq!(
        run(&["explode", "--config", "x.toml"], &[]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["profile"], &[]).status.code(), Some(1));
    assert_eq!(
        run(&["profile", "--config", "/nonexistent/run.toml"], &[])
            .status
            .code(),
        Some(1)
    );
    let help = run(&["--help"], &[]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--threads"));
}

#[test]
fn parse_error_reports_line_and_writes_manifest() {
    let dir = scratch("parse");
    let cfg = write_config(&dir, "[gas]\ngamma = 2.0\n\n[grid]\nn1 = \"many\"\n");
    let out = dir.join("out");
    let res = run(
        &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("line 5"), "{stderr}");
    let m = manifest(&run_dir(&out));
    assert_eq!(m["status"], "usage");
    assert_eq!(m["exit_code"], 1);
}

#[test]
fn profile_mode_reports_residual() {
    let dir = scratch("profile");
    let cfg = write_config(&dir, "[gas]\ngamma = 2.0\nv_minus = 1.0\nv_plus = 2.0\n");
    let out = dir.join("out");
    let res = run(
        &["profile", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let d = run_dir(&out);
    let m = manifest(&d);
    assert!(m["summary"]["ode_residual"].as_f64().unwrap() <= 1e-10);
    assert!(m["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a == "profile.csv"));
    assert!(fs::read_to_string(d.join("profile.csv"))
        .unwrap()
        .starts_with("xi1,"));
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert!(m["wall_seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(m["config"]["gas"]["v_plus"], 2.0);
}

#[test]
fn unperturbed_simulation_is_quiet_and_deterministic() {
    let dir = scratch("simulate");
    let cfg = write_config(&dir, SMALL_PROFILE_RUN);
    let mut outputs = Vec::new();
    for rep in 0..2 {
        let out = dir.join(format!("out{rep}"));
        let res = run(
            &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
            &[],
        );
        assert_eq!(
            res.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        let d = run_dir(&out);
        let m = manifest(&d);
        let s = &m["summary"];
        assert_eq!(s["sign_violations"], 0);
        assert!(s["decay"]["passed"].as_bool().unwrap());
        assert!(s["decay"]["sup_final"].as_f64().unwrap() <= 1e-8);
        assert!(s["max_balance_residual"].as_f64().unwrap() <= 1e-10);
        assert!(s["mass_balance_error"].as_f64().unwrap() <= 1e-10);
        let csvs: Vec<Vec<u8>> = ["diagnostics.csv", "shift.csv"]
            .iter()
            .map(|f| fs::read(d.join(f)).unwrap())
            .collect();
        outputs.push((csvs, m["config_hash"].clone()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn thread_count_precedence() {
    let dir = scratch("threads");
    let cfg = write_config(&dir, "[run]\nthreads = 3\n");
    let threads_of = |args: &[&str], env: &[(&str, &str)], tag: &str| {
        let out = dir.join(tag);
        let mut a = vec!["profile", "--config", &cfg, "--out", out.to_str().unwrap()];
        a.extend_from_slice(args);
        assert_eq!(run(&a, env).status.code(), Some(0));
        manifest(&run_dir(&out))["threads"].clone()
    };
    assert_eq!(threads_of(&[], &[], "config"), 3);
    assert_eq!(threads_of(&[], &[("SHOCKLAB_THREADS", "2")], "env"), 2);
    assert_eq!(
        threads_of(&["--threads", "1"], &[("SHOCKLAB_THREADS", "2")], "flag"),
        1
    );
}

#[test]
fn runtime_abort_keeps_partial_artifacts() {
    let dir = scratch("abort");
    // A Courant number far beyond the stability limit.
    let cfg = write_config(
        &dir,
        "[grid]\nhalf_length = 80.0\nn1 = 256\nn2 = 4\nn3 = 4\n\n[time]\ncfl = 4.0\nt_end = 2.0\n",
    );
    let out = dir.join("out");
    let res = run(
        &["simulate", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(res.status.code(), Some(2));
    let d = run_dir(&out);
    let m = manifest(&d);
    assert_eq!(m["status"], "numerical-failure");
    for f in ["abort.snap", "shift.csv", "diagnostics.csv"] {
        assert!(d.join(f).exists(), "{f}");
    }
    assert!(
        fs::read_to_string(d.join("shift.csv"))
            .unwrap()
            .lines()
            .count()
            > 2
    );
}

#[test]
fn poincare_mode_writes_report() {
    let dir = scratch("poincare");
    let cfg = write_config(&dir, "[run]\npoincare_samples = 20\nverify_seed = 7\n");
    let out = dir.join("out");
    let res = run(
        &["poincare", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let report = fs::read_to_string(run_dir(&out).join("poincare.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(lines.next(), Some("name,lhs,rhs,margin,verdict,seed"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(
        rows.iter()
            .filter(|r| r.starts_with("poincare/random"))
            .count(),
        20
    );
    assert!(rows.iter().all(|r| !r.contains(",fail,")));
}
