//! End-to-end tests of the `soft-torus` binary: exit codes, file
//! round-trips, determinism of generated artifacts.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_soft-torus")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn soft-torus")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_voiculescu_reports_defect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v16.json");
    let out = run(&["gen", "voiculescu", "--n", "16", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("n=16"), "{text}");
    // defect = 2 sin(pi/16) = 0.390180...
    let defect: f64 = text
        .split("defect=")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((defect - 0.39018064403225666).abs() < 1e-9);
    assert!(path.exists());
}

#[test]
fn gen_clockshift_has_tiny_defect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cs.json");
    let out = run(&[
        "gen", "clockshift", "--theta", "1/3", "--m", "2",
        "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let defect: f64 = stdout(&out)
        .split("defect=")
        .nth(1)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(defect <= 1e-13);
}

#[test]
fn gen_perturbed_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = run(&[
            "gen", "perturbed", "--theta", "1/2", "--m", "4", "--eps", "0.02",
            "--seed", "7", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "same flags+seed must give identical files");
}

#[test]
fn gen_requires_flags_for_kind() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.json");
    let out = run(&["gen", "voiculescu", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn usage_error_exits_2() {
    let out = run(&["definitely-not-a-command"]);
    assert_eq!(out.status.code(), Some(2));
}

fn gen_pair(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    full.push("--out");
    full.push(path.to_str().unwrap());
    let out = run(&full);
    assert!(out.status.success(), "{out:?}");
    path.to_str().unwrap().to_owned()
}

#[test]
fn invariants_on_voiculescu16() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_pair(dir.path(), "v16.json", &["voiculescu", "--n", "16"]);
    let json_path = dir.path().join("report.json");
    let out = run(&[
        "invariants", &path, "--json", json_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("bott=1"), "{text}");
    assert!(text.contains("exel=pass"), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(report["bott"], 1);
    assert!((report["winding_unnormalized"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn invariants_log0_branch_on_half_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_pair(dir.path(), "half.json", &["clockshift", "--theta", "1/2"]);
    let out = run(&["invariants", &path, "--branch", "log0"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    let norm: f64 = text
        .split("winding_normalized=")
        .nth(1)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((norm - 0.5).abs() < 1e-10, "{text}");
}

#[test]
fn invariants_principal_branch_on_half_pair_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_pair(dir.path(), "half.json", &["clockshift", "--theta", "1/2"]);
    let out = run(&["invariants", &path]);
    assert_eq!(out.status.code(), Some(4), "{out:?}");
}

#[test]
fn invariants_gap_too_small_exits_3() {
    // voiculescu(4) has spectrum of e(u,v) exactly at 1/2
    let dir = tempfile::tempdir().unwrap();
    let path = gen_pair(dir.path(), "v4.json", &["voiculescu", "--n", "4"]);
    let out = run(&["invariants", &path]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}

#[test]
fn invariants_on_commuting_pair_all_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = gen_pair(dir.path(), "c.json", &["clockshift", "--theta", "0/1", "--m", "4"]);
    let out = run(&["invariants", &path]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("bott=0"), "{text}");
    assert!(text.contains("exel=pass"), "{text}");
}

#[test]
fn solve_perturbed_half_pair_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_pair(
        dir.path(),
        "p.json",
        &["perturbed", "--theta", "1/2", "--m", "4", "--eps", "0.02", "--seed", "3"],
    );
    let solved_path = dir.path().join("solved.json");
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "solve", &input, "--theta", "1/2",
        "--out", solved_path.to_str().unwrap(),
        "--report", report_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["relation_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(report["converged"], serde_json::Value::Bool(true));
    // solved pair parses and exactly anticommutes
    let inv = run(&["invariants", solved_path.to_str().unwrap(), "--branch", "log0"]);
    assert_eq!(inv.status.code(), Some(0), "{inv:?}");
}

#[test]
fn solve_exact_pair_is_noop() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_pair(dir.path(), "e.json", &["clockshift", "--theta", "1/3", "--m", "2"]);
    let out = run(&["solve", &input, "--theta", "1/3"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = stdout(&out);
    let dist: f64 = text
        .split("dist_u=")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(dist <= 1e-12, "{text}");
}

#[test]
fn solve_infeasible_voiculescu_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_pair(dir.path(), "v8.json", &["voiculescu", "--n", "8"]);
    let out = run(&["solve", &input, "--theta", "0/1"]);
    assert_eq!(out.status.code(), Some(5), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("winding_normalized=0.125"), "{stderr}");
}

#[test]
fn solve_irrational_target_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_pair(dir.path(), "c.json", &["clockshift", "--theta", "0/1", "--m", "2"]);
    let out = run(&["solve", &input, "--theta", "0.61803398874989485"]);
    assert_eq!(out.status.code(), Some(5), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("not rational"), "{stderr}");
}

#[test]
fn solve_decimal_theta_snaps_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let input = gen_pair(dir.path(), "e.json", &["clockshift", "--theta", "1/2", "--m", "2"]);
    let out = run(&["solve", &input, "--theta", "0.5"]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("snapped"), "{stderr}");
}

#[test]
fn sweep_csv_contract() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--theta", "1/2", "--n-list", "8", "--eps-list", "0.0",
        "--trials", "1", "--seed", "0", "--out", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,q,p,eps,seed,defect,winding_norm,bott,gap,exel_ok,solve_dist,solve_iters,solve_converged,wall_ms"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 14);
    assert_eq!(row[0], "8"); // n
    assert_eq!(row[1], "2"); // q
    let defect: f64 = row[5].parse().unwrap();
    assert!(defect <= 1e-12);
    let bott: i64 = row[7].parse().unwrap();
    assert_eq!(bott, 0);
    let solve_dist: f64 = row[10].parse().unwrap();
    assert!((0.0..=1e-12).contains(&solve_dist));
    assert!(!text.contains('\r'), "LF endings only");
}

#[test]
fn sweep_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run_sweep = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = Command::new(bin())
            .env("SOFT_TORUS_THREADS", threads)
            .args([
                "sweep", "--theta", "0/1", "--n-list", "4,2", "--eps-list", "0.02,0.01",
                "--trials", "2", "--seed", "11", "--out", path.to_str().unwrap(),
            ])
            .output()
            .expect("spawn");
        assert_eq!(out.status.code(), Some(0), "{out:?}");
        std::fs::read_to_string(&path).unwrap()
    };
    let a = run_sweep("a.csv", "1");
    let b = run_sweep("b.csv", "4");
    let strip_wall = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_owned())
            .collect()
    };
    assert_eq!(strip_wall(&a), strip_wall(&b));
    // rows sorted by (n, eps, seed), seeds consecutive from the base
    let rows: Vec<Vec<String>> = a
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    let ns: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ns, vec![2, 2, 2, 2, 4, 4, 4, 4]);
    let seeds: Vec<u64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert_eq!(seeds, (11..19).collect::<Vec<u64>>());
}

#[test]
fn sweep_commuting_family_passes_exel_throughout() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--theta", "0/1", "--n-list", "8,12", "--eps-list", "0.01,0.02",
        "--trials", "25", "--seed", "42", "--out", csv_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[9], "1", "exel_ok must hold on every row: {row}");
        let bott: i64 = fields[7].parse().unwrap();
        assert_eq!(bott, 0, "{row}");
        let dist: f64 = fields[10].parse().unwrap();
        let eps: f64 = fields[3].parse().unwrap();
        assert!(dist >= 0.0 && dist <= 25.0 * eps, "{row}");
    }
}

#[test]
fn sweep_rejects_indivisible_n() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep", "--theta", "1/3", "--n-list", "4", "--eps-list", "0.0",
        "--trials", "1", "--out", dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}

#[test]
fn unreadable_pairfile_exits_2() {
    let out = run(&["invariants", "/nonexistent/p.json"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("g.json");
    std::fs::write(&garbage, "{not json").unwrap();
    let out = run(&["invariants", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_lift_and_twist_and_irrep() {
    let dir = tempfile::tempdir().unwrap();
    let base = gen_pair(dir.path(), "b.json", &["clockshift", "--theta", "1/3"]);
    // lift of an exact pair commutes exactly
    let lift_path = dir.path().join("lift.json");
    let out = run(&[
        "gen", "lift", "--input", &base, "--theta", "1/3",
        "--out", lift_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("n=9"), "{text}");
    let lift_defect: f64 = text.split("defect=").nth(1).unwrap().trim().parse().unwrap();
    assert!(lift_defect <= 1e-12, "{text}");

    let twist_path = dir.path().join("twist.json");
    let out = run(&[
        "gen", "twist", "--input", &base, "--r1", "0.25", "--r2", "0.1",
        "--out", twist_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let irrep_path = dir.path().join("irrep.json");
    let out = run(&[
        "gen", "irrep", "--theta", "1/4", "--t1", "0.3", "--t2", "0.6",
        "--out", irrep_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout(&out);
    assert!(text.contains("n=4"), "{text}");
    let irrep_defect: f64 = text.split("defect=").nth(1).unwrap().trim().parse().unwrap();
    assert!(irrep_defect <= 1e-13);

    // explicit q-th roots: r1 = 0.325 turns has r1^4 = 1.3 turns = t1 = 0.3
    let irrep2_path = dir.path().join("irrep2.json");
    let out = run(&[
        "gen", "irrep", "--theta", "1/4", "--t1", "0.3", "--t2", "0.6",
        "--r1", "0.325", "--r2", "0.15",
        "--out", irrep2_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    // mismatched roots are rejected as usage errors
    let out = run(&[
        "gen", "irrep", "--theta", "1/4", "--t1", "0.3", "--t2", "0.6",
        "--r1", "0.2", "--r2", "0.15",
        "--out", dir.path().join("bad.json").to_str().unwrap(),
    ]);
    assert!(!out.status.success(), "{out:?}");

    let haar_path = dir.path().join("haar.json");
    let out = run(&["gen", "haar", "--n", "6", "--seed", "9", "--out", haar_path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
}
