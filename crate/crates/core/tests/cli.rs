use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pidtune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pidtune")).args(args).env_remove("PIDTUNE_CONFIG").output().expect("spawn pidtune")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Results with the wall-clock field dropped.
fn results_without_timing(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(&fs::read(path).unwrap()).unwrap();
    for r in v.as_array_mut().unwrap() {
        r.as_object_mut().unwrap().remove("wall_time_ms");
    }
    v
}

#[test]
fn generate_counts_the_default_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let out = pidtune(&["generate", "--output-dir", p(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "24");
    assert!(dir.path().join("trials.json").exists());

    let out = pidtune(&["generate", "--output-dir", p(dir.path()), "--optimizer", "de"]);
    assert_eq!(stdout(&out).trim(), "12");
}

#[test]
fn generate_warns_on_empty_initial_states() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "initial_states = []\n").unwrap();
    let out = pidtune(&["generate", "--config", p(&cfg), "--output-dir", p(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "0");
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn generate_rejects_unknown_robot_in_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[[robots]]\nkind = \"hexapod\"\n").unwrap();
    let out = pidtune(&["generate", "--config", p(&cfg), "--output-dir", p(dir.path())]);
    assert!(!out.status.success());
}

#[test]
fn run_writes_logs_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert!(pidtune(&["generate", "--output-dir", p(root)]).status.success());
    let matrix = root.join("trials.json");

    let (a, b) = (root.join("a"), root.join("b"));
    let out = pidtune(&["run", "--matrix", p(&matrix), "--output-dir", p(&a)]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("/24 trials converged"));
    let out = pidtune(&["run", "--matrix", p(&matrix), "--output-dir", p(&b), "--parallelism", "4"]);
    assert!(out.status.success(), "{}", stderr(&out));

    let logs_a = read_dir_sorted(&a.join("logs"));
    assert_eq!(logs_a.len(), 24);
    assert!(logs_a.iter().all(|(name, _)| name.ends_with(".csv")));
    assert_eq!(logs_a, read_dir_sorted(&b.join("logs")));
    assert_eq!(results_without_timing(&a.join("results.json")), results_without_timing(&b.join("results.json")));
}

#[test]
fn run_rejects_unknown_robot_in_matrix() {
    let dir = tempfile::tempdir().unwrap();
    assert!(pidtune(&["generate", "--output-dir", p(dir.path())]).status.success());
    let matrix = dir.path().join("trials.json");
    let text = fs::read_to_string(&matrix).unwrap().replace("\"ddrm\"", "\"hexapod\"");
    fs::write(&matrix, text).unwrap();
    let out = pidtune(&["run", "--matrix", p(&matrix), "--output-dir", p(dir.path())]);
    assert!(!out.status.success());
    assert!(!dir.path().join("results.json").exists());
}

#[test]
fn sim_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sim", "--kp", "8", "--ki", "0.05", "--kd", "0.5", "--robot", "ddrm", "--output-dir", p(dir.path())];
    let out = pidtune(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("converged: true"));
    let trace = dir.path().join("trace_ddrm.csv");
    let first = fs::read(&trace).unwrap();
    let text = String::from_utf8(first.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t_ms,theta_deg,command"));
    assert_eq!(lines.count(), 51);

    assert!(pidtune(&args).status.success());
    assert_eq!(fs::read(&trace).unwrap(), first);
}

#[test]
fn sim_rejects_out_of_bounds_gains() {
    let dir = tempfile::tempdir().unwrap();
    let out =
        pidtune(&["sim", "--kp", "30", "--ki", "0", "--kd", "0", "--robot", "ddrm", "--output-dir", p(dir.path())]);
    assert!(!out.status.success());
    assert!(!stderr(&out).is_empty());
}

#[test]
fn report_writes_summary_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    assert!(pidtune(&["generate", "--output-dir", p(root)]).status.success());
    assert!(pidtune(&["run", "--matrix", p(&root.join("trials.json")), "--output-dir", p(root), "--parallelism", "4"])
        .status
        .success());
    let out = pidtune(&["report", "--results", p(&root.join("results.json")), "--output-dir", p(&root.join("report"))]);
    assert!(out.status.success(), "{}", stderr(&out));

    let summary = fs::read_to_string(root.join("report/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 24);
    let svgs: Vec<_> =
        read_dir_sorted(&root.join("report")).into_iter().filter(|(name, _)| name.ends_with(".svg")).collect();
    assert_eq!(svgs.len(), 6);
    assert!(svgs.iter().any(|(name, _)| name == "kde_omnidirectional_eec2.svg"));
}

#[test]
fn report_on_empty_results_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.json");
    fs::write(&results, "[]").unwrap();
    let out = pidtune(&["report", "--results", p(&results), "--output-dir", p(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.starts_with("robot,eec,initial_state,optimizer"));
}

#[test]
fn report_rejects_malformed_results() {
    let dir = tempfile::tempdir().unwrap();
    let results = dir.path().join("results.json");
    fs::write(&results, "[{\"config\": ").unwrap();
    let out = pidtune(&["report", "--results", p(&results), "--output-dir", p(dir.path())]);
    assert!(!out.status.success());
}

#[test]
fn usage_errors_exit_nonzero() {
    assert!(!pidtune(&[]).status.success());
    assert!(!pidtune(&["sim", "--kp", "1"]).status.success());
    assert!(pidtune(&["--help"]).status.success());
}
