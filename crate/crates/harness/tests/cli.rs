use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn kinetics(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinetics")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn only_run_dir(root: &Path) -> PathBuf {
    let dirs: Vec<_> = fs::read_dir(root).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1, "{dirs:?}");
    dirs.into_iter().next().unwrap()
}

const MINIMAL: &str = "[kernel]\ne = 0.5\ngamma = 1.0\n[simulate]\nparticles = 2000\nt_final = 0.05\n";

#[test]
fn missing_subcommand_is_usage_error() {
    assert_eq!(kinetics(&[]).status.code(), Some(1));
    assert_eq!(kinetics(&["simulate"]).status.code(), Some(1));
    assert_eq!(kinetics(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_key_is_named() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.toml", "[kernel]\ne = 0.5\ngamma = 1.0\nrestitution = 0.3\n[simulate]\nparticles = 10\nt_final = 1.0\n");
    let o = kinetics(&["simulate", "--config", cfg.to_str().unwrap(), "--out", t.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("restitution"), "{}", stderr(&o));
}

#[test]
fn constraint_violations_cite_the_constraint() {
    let t = tempfile::tempdir().unwrap();
    let out = t.path().join("runs");
    let e = write(t.path(), "e.toml", &MINIMAL.replace("e = 0.5", "e = 1.2"));
    let o = kinetics(&["simulate", "--config", e.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("e ∈ (0,1]"), "{}", stderr(&o));
    let g = write(t.path(), "g.toml", &MINIMAL.replace("gamma = 1.0", "gamma = 0.0"));
    let o = kinetics(&["simulate", "--config", g.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("γ ∈ (0,2] (hard-potential range)"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn minimal_simulate_runs_and_reports() {
    let t = tempfile::tempdir().unwrap();
    let cfg = write(t.path(), "c.toml", MINIMAL);
    let out = t.path().join("runs");
    let o = kinetics(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9", "--workers", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let dir = only_run_dir(&out);
    assert!(dir.file_name().unwrap().to_str().unwrap().starts_with("simulate-"));
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["workers"], 1);
    assert_eq!(manifest["spec"]["kernel"]["s"], 0.25);
    assert_eq!(manifest["spec"]["kernel"]["n"], 16);
    assert_eq!(manifest["spec"]["params"]["simulate"]["dt_fraction"], 1.0);
    assert!(fs::read_to_string(dir.join("moments.csv")).unwrap().starts_with("t,M0,M2,M4,M6,E,px,py,pz,collisions"));

    let r = kinetics(&["report", dir.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0));
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("PASS [criterion 6] largest relative energy increase"), "{text}");
    assert!(dir.join("plots/moments.dat").is_file());

    fs::remove_file(dir.join("moments.csv")).unwrap();
    let r = kinetics(&["report", dir.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stderr(&r).contains("moments.csv"), "{}", stderr(&r));
    fs::remove_file(dir.join("manifest.json")).unwrap();
    let r = kinetics(&["report", dir.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stderr(&r).contains("manifest.json") && stderr(&r).contains("moments.csv"), "{}", stderr(&r));
}

#[test]
fn failed_invariant_exits_two() {
    // A light tail leaves the initial moments flat across the ladder.
    let t = tempfile::tempdir().unwrap();
    let cfg = write(
        t.path(),
        "c.toml",
        "[kernel]\ne = 0.5\ngamma = 1.0\nn = 4\n[moment_creation]\nq = 60.0\nladder = [500, 1000]\nt0 = 0.01\nt_final = 0.02\ncadence = 0.01\n",
    );
    let out = t.path().join("runs");
    let o = kinetics(&["moment-creation", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("invariant failed: initial moment growth per doubling of N"), "{}", stderr(&o));
    let r = kinetics(&["report", only_run_dir(&out).to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
}
