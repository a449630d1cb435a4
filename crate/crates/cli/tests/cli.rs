use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ising"))
        .args(args)
        .env_remove("ISING_MAX_BITS")
        .env_remove("ISING_JOBS")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn xor_is_reported_infeasible() {
    let out = ising(&["synth", path_str(&data("xor.tt"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("infeasible"));
    assert!(out.stdout.is_empty());
}

#[test]
fn synth_then_check_closes_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let ham = dir.path().join("xor_and.ham");
    let table = data("xor_and.tt");
    let out = ising(&["synth", path_str(&table), "--no-local-minima", "-o", path_str(&ham)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stderr = text(&out.stderr);
    assert!(stderr.contains("1 local minimum per input level"), "{stderr}");
    assert!(stderr.contains("# config:"));

    let out = ising(&["check", path_str(&ham), path_str(&table), "--no-local-minima"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
    assert!(text(&out.stdout).starts_with("certified"));

    // The same Hamiltonian does not encode plain XOR x OR.
    let other = dir.path().join("xor_or.tt");
    std::fs::write(&other, "shape 2 2 bool\n0 0 -> 0 0\n0 1 -> 1 1\n1 0 -> 1 1\n1 1 -> 0 1\n").unwrap();
    let out = ising(&["check", path_str(&ham), path_str(&other)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("FAILED"));
}

#[test]
fn synth_output_is_deterministic() {
    let table = data("type2_3x3.tt");
    let a = ising(&["synth", path_str(&table)]);
    let b = ising(&["synth", path_str(&table), "--jobs", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn classify_2_1_csv() {
    let out = ising(&["classify", "2", "1", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = text(&out.stdout);
    assert!(stdout.starts_with("shape,type,count,feasible_count\n"));
    let feasible: u64 = stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(feasible, 14);
}

#[test]
fn budget_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_ising"))
        .args(["classify", "3", "2"])
        .env("ISING_MAX_BITS", "8")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("budget"));
}

#[test]
fn malformed_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.tt");
    std::fs::write(&bad, "shape 2 1 bool\n0 0 -> 0\n").unwrap();
    let out = ising(&["synth", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("missing row"));
    let out = ising(&["synth", path_str(&dir.path().join("absent.tt"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn refine_reports_ratio_and_infeasible_start() {
    let out = ising(&["refine", path_str(&data("xor_and.tt"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stderr).contains("tree set repeated"));
    assert!(text(&out.stdout).contains("iterate 1 mode tree"));

    let out = ising(&["refine", path_str(&data("type2_3x3.tt"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn aux_search_prints_map_in_requested_format() {
    let out = ising(&["--format", "bool", "aux-search", path_str(&data("xor.tt")), "-k", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("shape 2 1 bool"));
    assert!(stdout.contains("ham 2 2"));

    let out = ising(&["aux-search", path_str(&data("xor.tt")), "-k", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn diagram_writes_ppm_and_legend() {
    let dir = tempfile::tempdir().unwrap();
    let ppm = dir.path().join("j1.ppm");
    let legend = dir.path().join("j1.txt");
    let out = ising(&[
        "diagram",
        "--j",
        "1",
        "--resolution",
        "51",
        "-o",
        path_str(&ppm),
        "--legend",
        path_str(&legend),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(std::fs::read_to_string(&ppm).unwrap().starts_with("P3\n51 51\n255\n"));
    let legend = std::fs::read_to_string(&legend).unwrap();
    assert!(legend.contains("adjacent 0-1 0-2 1-2 1-3 2-3"), "{legend}");
}

#[test]
fn simulate_greedy_and_glauber() {
    let dir = tempfile::tempdir().unwrap();
    let ham = dir.path().join("h.ham");
    std::fs::write(&ham, "ham 2 2\nh 0 0.5\nh 1 1.0\nw 0 0 -0.3\nw 1 0 -0.5\nw 0 1 -1.0\nw 1 1 -1.0\nj 0 1 1.0\n").unwrap();
    let out = ising(&["simulate", path_str(&ham), "--input", "+1 +1", "--start", "+1,+1"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("-> (-1,+1) after 1 steps"), "{}", text(&out.stderr));

    let args = ["simulate", path_str(&ham), "--input", "1 1", "--format", "bool", "--glauber", "--steps", "500", "--seed", "3"];
    let a = ising(&args);
    let b = ising(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(text(&a.stdout).lines().count(), 502);
}

#[test]
fn voronoi_build_from_and_embedding() {
    let dir = tempfile::tempdir().unwrap();
    let emb = dir.path().join("and.emb");
    let table = dir.path().join("and.tt");
    std::fs::write(&emb, "emb 2 1\n0.5\n0.5\n0.5 0.5\n").unwrap();
    std::fs::write(&table, "shape 2 1 spin\n-1 -1 -> -1\n+1 -1 -> -1\n-1 +1 -> -1\n+1 +1 -> +1\n").unwrap();
    let out = ising(&["voronoi-build", path_str(&emb), path_str(&table)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("ham 2 1\n"));

    let out = ising(&["voronoi-build", path_str(&emb), path_str(&data("xor.tt"))]);
    assert_eq!(out.status.code(), Some(1));
}
