use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracsrc"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fracsrc-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = r#"{
  "id": "small",
  "dim": 1, "n": 16, "M": 8, "alpha": 0.4,
  "mu": {"kind": "polynomial", "coeffs": [5, 10]},
  "f_true": {"kind": "trig1d", "sin_half_pi": 1, "x2": 1, "constant": 1},
  "omega": {"exclude": {"lo": [0.25], "hi": [0.75]}},
  "delta": 0.01, "seed": 3, "beta": 1e-4, "L": "auto",
  "eps": 1e-3, "f0": 2
}"#;

#[test]
fn list_shows_registry() {
    let d = scratch("list");
    let o = run(&["list"], &d);
    assert!(o.status.success());
    let text = stdout(&o);
    for id in ["1d-a", "1d-b", "2d-a", "2d-table-w10-d1", "1d-table"] {
        assert!(text.contains(id), "{id} missing from list");
    }
}

#[test]
fn reconstruct_is_reproducible() {
    let (a, b) = (scratch("rep-a"), scratch("rep-b"));
    for d in [&a, &b] {
        let o = run(&["reconstruct", "--experiment", "1d-b"], d);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for name in ["1d-b.profile.csv", "1d-b.gp"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let strip = |p: PathBuf| {
        let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("seconds");
        v
    };
    assert_eq!(strip(a.join("1d-b.record.json")), strip(b.join("1d-b.record.json")));

    let profile = fs::read_to_string(a.join("1d-b.profile.csv")).unwrap();
    assert_eq!(profile.lines().next(), Some("x,f_true,f_rec"));
    assert_eq!(profile.lines().count(), 42);
    let results = fs::read_to_string(a.join("1d-b.results.csv")).unwrap();
    assert_eq!(
        results.lines().next(),
        Some("id,dim,alpha,delta,omega,beta,L,eps,err,K,seconds,seed")
    );
}

#[test]
fn seed_override_changes_the_run() {
    let (a, b) = (scratch("seed-a"), scratch("seed-b"));
    assert!(run(&["reconstruct", "--experiment", "1d-b"], &a).status.success());
    assert!(run(&["reconstruct", "--experiment", "1d-b", "--seed", "99"], &b).status.success());
    let pa = fs::read(a.join("1d-b.profile.csv")).unwrap();
    let pb = fs::read(b.join("1d-b.profile.csv")).unwrap();
    assert_ne!(pa, pb);
    assert!(fs::read_to_string(b.join("1d-b.results.csv")).unwrap().trim_end().ends_with(",99"));
}

#[test]
fn config_file_runs_forward_noise_and_reconstruct() {
    let d = scratch("config");
    let cfg = d.join("small.json");
    fs::write(&cfg, SMALL).unwrap();
    let c = cfg.to_str().unwrap();

    let o = run(&["forward", "--config", c], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(d.join("small.forward.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);

    let o = run(&["noise", "--config", c], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(d.join("small.observation.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 9 * 17);

    let o = run(&["reconstruct", "--config", c], &d);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("small"));
    assert!(d.join("small.record.json").exists());
}

#[test]
fn sweep_writes_one_row_per_run() {
    let d = scratch("sweep");
    let o = bin()
        .args(["sweep", "--experiment", "1d-table", "--threads", "2", "--out"])
        .arg(&d)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(d.join("results.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].starts_with("1d-table-w10-d1,"));
}

#[test]
fn unknown_field_is_a_validation_error() {
    let d = scratch("bad");
    let cfg = d.join("bad.json");
    fs::write(&cfg, SMALL.replace("\"eps\"", "\"epsilon\"")).unwrap();
    let o = run(&["reconstruct", "--config", cfg.to_str().unwrap()], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("epsilon"), "{}", stderr(&o));
}

#[test]
fn out_of_range_value_names_the_field() {
    let d = scratch("range");
    let cfg = d.join("range.json");
    fs::write(&cfg, SMALL.replace("\"alpha\": 0.4", "\"alpha\": 1.2")).unwrap();
    let o = run(&["reconstruct", "--config", cfg.to_str().unwrap()], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alpha"), "{}", stderr(&o));
}

#[test]
fn selection_errors_exit_with_one() {
    let d = scratch("select");
    assert_eq!(run(&["reconstruct"], &d).status.code(), Some(1));
    assert_eq!(run(&["reconstruct", "--experiment", "nope"], &d).status.code(), Some(1));
    assert_eq!(run(&["reconstruct", "--experiment", "1d-table"], &d).status.code(), Some(1));
    let o = run(&["reconstruct", "--config", "/nonexistent/x.json"], &d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/x.json"));
}

#[test]
fn iteration_cap_exits_with_three() {
    let d = scratch("cap");
    let cfg = d.join("cap.json");
    fs::write(&cfg, SMALL.replace("\"eps\": 1e-3", "\"eps\": 1e-12, \"max_iters\": 2")).unwrap();
    let o = run(&["reconstruct", "--config", cfg.to_str().unwrap()], &d);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(d.join("small.profile.csv").exists());
}

#[test]
fn verify_reports_every_check() {
    let d = scratch("verify");
    let o = run(&["verify"], &d);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("PASS") || l.starts_with("FAIL")).collect();
    assert_eq!(lines.len(), 6);
    let any_fail = lines.iter().any(|l| l.starts_with("FAIL"));
    assert_eq!(o.status.code(), Some(if any_fail { 2 } else { 0 }));
}
