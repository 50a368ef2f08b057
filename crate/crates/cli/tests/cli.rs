use std::process::{Command, Output};

fn phigamma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phigamma")).args(args).env_remove("PHIGAMMA_CONFIG").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("phigamma-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn lt_series_identity() {
    let o = phigamma(&["lt", "series", "--a", "1", "--N", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("Z + O(Z^5)"), "{}", stdout(&o));
}

#[test]
fn exact_sequence_counts_for_q2() {
    let cfg = temp_file("p2.cfg", "p = 2\n");
    let o = phigamma(&["--config", cfg.to_str().unwrap(), "check", "exact", "--j", "2", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("CLAIM kernel VERDICT ok LHS 4 RHS 4"), "{out}");
    assert!(out.contains("SUMMARY ok=5 fail=0"), "{out}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(phigamma(&["bogus"]).status.code(), Some(1));
    assert_eq!(phigamma(&["al", "phi", "Z^^"]).status.code(), Some(1));
    assert_eq!(phigamma(&["--help"]).status.code(), Some(0));
}

#[test]
fn herr_cohomology_of_twist() {
    let m = temp_file("twist.txt", "# unramified twist by -1\nrank 1\nphi -1\nunits standard\n");
    let o = phigamma(&["herr", "cohom", "--module", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("RESULT stabilized [] [1] []"), "{}", stdout(&o));
}

#[test]
fn mathematical_failures_exit_two() {
    let z = temp_file("zero.txt", "rank 1\nphi 0\nunits standard\n");
    assert_eq!(phigamma(&["herr", "cohom", "--module", z.to_str().unwrap()]).status.code(), Some(2));
    let cfg = temp_file("q2.cfg", "p = 2\n");
    let t = temp_file("triv.txt", "rank 1\nphi 1\nunits standard\n");
    let o = phigamma(&["--config", cfg.to_str().unwrap(), "herr", "cohom", "--module", t.to_str().unwrap(), "--policy", "2,4,8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("RESULT not-stabilized"));
}

#[test]
fn config_hash_is_deterministic() {
    let a = stdout(&phigamma(&["check", "weakdec", "--b", "w^-1 + w^2"]));
    let b = stdout(&phigamma(&["check", "weakdec", "--b", "w^-1 + w^2"]));
    assert_eq!(a, b);
    assert!(a.starts_with("CONFIG "));
}
