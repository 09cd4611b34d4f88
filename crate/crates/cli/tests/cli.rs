use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quasiheat"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn without_timestamp(csv: &str) -> String {
    csv.lines().filter(|l| !l.starts_with("# timestamp")).collect::<Vec<_>>().join("\n")
}

const SMALL_SWEEP: &str = "scenario = \"qubit-theta-eta\"\nstate.P00 = 0.547\n\
    sweep.axis1.name = \"unitary.theta\"\nsweep.axis1.min = 0.1\nsweep.axis1.max = 1.4\nsweep.axis1.n = 7\n\
    sweep.axis2.name = \"state.eta\"\nsweep.axis2.min = -0.19\nsweep.axis2.max = 0.19\nsweep.axis2.n = 5\n";

#[test]
fn sweep_writes_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SWEEP);
    let out = dir.path().join("out.csv");
    let o = run(&["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# quasiheat "));
    assert!(csv.contains("# cells = 35"));
    assert!(csv.contains("# state.P00 = 0.547"));
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 36);
    assert!(data[0].starts_with("unitary.theta,state.eta,status,Q,Q_tpm"));
}

#[test]
fn sweep_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SWEEP);
    let a = bin().args(["sweep", cfg.to_str().unwrap()]).env("QUASIHEAT_THREADS", "1").output().unwrap();
    let b = bin().args(["sweep", cfg.to_str().unwrap()]).env("QUASIHEAT_THREADS", "4").output().unwrap();
    let c = run(&["--sequential", "sweep", cfg.to_str().unwrap()]);
    let [a, b, c] = [a, b, c].map(|o| without_timestamp(&String::from_utf8(o.stdout).unwrap()));
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn set_overrides_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SWEEP);
    let o = run(&["sweep", cfg.to_str().unwrap(), "--set", "sweep.axis2.n=2", "--set", "output.columns=Q,T1"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("# cells = 14"));
    assert!(csv.contains("\nunitary.theta,state.eta,status,Q,T1\n"));
}

#[test]
fn eta_zero_sweep_has_no_negativity() {
    let dir = tempfile::tempdir().unwrap();
    let text = "scenario = \"qubit-theta-eta\"\nstate.eta = 0.0\noutput.columns = \"negativity\"\n\
        sweep.axis1.name = \"unitary.theta\"\nsweep.axis1.min = 0.2\nsweep.axis1.max = 1.2\nsweep.axis1.n = 2\n";
    let o = run(&["sweep", write(dir.path(), "z.toml", text).to_str().unwrap()]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.ends_with(",ok,0")));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["sweep"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "/nonexistent/config.toml"]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.toml", &SMALL_SWEEP.replace("state.P00", "state.p00"));
    let o = run(&["sweep", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("state.p00"));
    assert_eq!(run(&["check", "--trials", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn infeasible_point_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.toml", "scenario = \"qubit-theta-eta\"\nstate.P00 = 0.547\nstate.eta = 0.5\n");
    let o = run(&["point", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta"));
}

#[test]
fn backflow_point_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let cfg = configs().join("point-backflow.toml");
    let o = run(&["point", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--set", "probe.shots=10000"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let t1 = text.lines().find(|l| l.starts_with("T1 ")).unwrap();
    assert!(t1.ends_with("VIOLATED"));
    assert!(text.contains("p(01 -> 10) = -"));
    assert!(text.contains("# probe reconstruction of row (0, 1)"));
    assert!(text.contains("sampled"));
}

#[test]
fn property_check_passes_and_mutant_fails() {
    let ok = run(&["check", "--seed", "5", "--trials", "40"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let other = run(&["check", "--seed", "6", "--trials", "40"]);
    assert_eq!(other.status.code(), Some(0));
    let bad = run(&["check", "--seed", "5", "--trials", "40", "--mutant", "sign-flip"]);
    assert_eq!(bad.status.code(), Some(3));
    let text = String::from_utf8(bad.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("FAIL marginal-final")));
}
