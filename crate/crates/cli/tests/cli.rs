use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hyperrank::fixtures::{planted_cliques, toy_hypergraph};
use hyperrank::hypergraph::write_hypergraph;
use hyperrank::UniformHypergraph;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyperrank")).args(args).env_remove("HYPERRANK_THREADS").output().unwrap()
}

fn write_hg(dir: &Path, name: &str, h: &UniformHypergraph) -> PathBuf {
    let path = dir.join(name);
    let mut buf = Vec::new();
    write_hypergraph(&mut buf, h).unwrap();
    std::fs::write(&path, buf).unwrap();
    path
}

fn toy_v(dir: &Path) -> PathBuf {
    let path = dir.join("v.txt");
    std::fs::write(&path, "0.5\n0.5\n0\n0\n0\n0\n0\n0\n0\n").unwrap();
    path
}

fn read_column(path: &Path) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_toy_matches_reference_vector() {
    let dir = TempDir::new().unwrap();
    let hg = write_hg(dir.path(), "toy.hg", &toy_hypergraph());
    let v = toy_v(dir.path());
    let out = dir.path().join("y.csv");
    let o = run(&["solve", "--input", s(&hg), "--alpha", "0.2", "--v", s(&v), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let y = read_column(&out);
    let expected = [0.4796, 0.4796, 0.0527, 0.0527, 0.0, 0.0, 0.0, 0.0, 0.0];
    for (a, b) in y.iter().zip(&expected) {
        assert!((a - b).abs() <= 5e-4);
    }
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["config"]["alpha"], 0.2);
    assert_eq!(summary["report"]["converged"], true);
    assert!(summary["report"]["varsigma"].as_f64().unwrap() < 1.0);
}

#[test]
fn zero_damping_returns_v() {
    let dir = TempDir::new().unwrap();
    let hg = write_hg(dir.path(), "toy.hg", &toy_hypergraph());
    let v = toy_v(dir.path());
    let out = dir.path().join("y.csv");
    let o = run(&["solve", "--input", s(&hg), "--alpha", "0", "--v", s(&v), "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(read_column(&out), vec![0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn mpr_and_mlppr_agree_after_normalizing() {
    let dir = TempDir::new().unwrap();
    let hg = write_hg(dir.path(), "toy.hg", &toy_hypergraph());
    let v = toy_v(dir.path());
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    let tight = ["--tol-step", "1e-13", "--tol-eq", "1e-13"];
    for (model, out) in [("mlppr", &a), ("mpr", &b)] {
        let mut args =
            vec!["solve", "--input", s(&hg), "--alpha", "0.2", "--v", s(&v), "--model", model, "--out", s(out)];
        args.extend(tight);
        assert!(run(&args).status.success());
    }
    let (y, x) = (read_column(&a), read_column(&b));
    let total: f64 = y.iter().sum();
    let gap: f64 = y.iter().zip(&x).map(|(y, x)| (y / total - x).abs()).sum();
    assert!(gap <= 1e-6, "{gap}");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let hg = write_hg(dir.path(), "toy.hg", &toy_hypergraph());
    let out = dir.path().join("y.csv");
    assert_eq!(run(&["solve", "--input", s(&hg)]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--input", s(&hg), "--alpha", "1.5", "--out", s(&out)]).status.code(), Some(1));
    let bad = dir.path().join("bad.hg");
    std::fs::write(&bad, "k=3 directed=0\n1 2\n").unwrap();
    assert_eq!(run(&["solve", "--input", s(&bad), "--alpha", "0.2", "--out", s(&out)]).status.code(), Some(2));
    let missing = dir.path().join("missing.hg");
    assert_eq!(run(&["solve", "--input", s(&missing), "--alpha", "0.2", "--out", s(&out)]).status.code(), Some(2));
    let o = run(&["solve", "--input", s(&hg), "--alpha", "0.2", "--max-iter", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(run(&["--help"]).status.success());
}

#[test]
fn partition_recovers_planted_labels() {
    let dir = TempDir::new().unwrap();
    let (h, blocks) = planted_cliques(&[5, 5]);
    let hg = write_hg(dir.path(), "planted.hg", &h);
    let (out, curve) = (dir.path().join("parts.csv"), dir.path().join("h.csv"));
    let o = run(&["partition", "--input", s(&hg), "--parts", "2", "--out", s(&out), "--hcurve", s(&curve)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let labels = read_column(&out);
    for b in &blocks {
        assert!(b.iter().all(|&v| labels[v] == labels[b[0]]));
    }
    assert_ne!(labels[blocks[0][0]], labels[blocks[1][0]]);
    assert_eq!(std::fs::read_to_string(&curve).unwrap().lines().count(), 10);
}

#[test]
fn motifs_on_small_network() {
    let dir = TempDir::new().unwrap();
    let snap = dir.path().join("edges.txt");
    std::fs::write(&snap, "# FromNodeId\tToNodeId\n1\t2\n2\t3\n3\t1\n3\t4\n4\t5\n5\t6\n").unwrap();
    let (out, stats, ids) = (dir.path().join("h.hg"), dir.path().join("stats.json"), dir.path().join("ids.csv"));
    let o = run(&["motifs", "--snap", s(&snap), "--out", s(&out), "--stats", s(&stats), "--id-map", s(&ids)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let hg = std::fs::read_to_string(&out).unwrap();
    assert_eq!(hg, "k=3 directed=0 n=3\n1 2 3\n");
    let st: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(st["d3cs"], 1);
    assert_eq!(st["input"]["nodes"], 6);
    // a network without cycles is a data error
    std::fs::write(&snap, "1 2\n2 3\n").unwrap();
    assert_eq!(run(&["motifs", "--snap", s(&snap), "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn subspace_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = run(&["--threads", threads, "subspace", "--n", "100", "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("seed,method,success_ratio,parts_found,num_edges\n7,mlppr,"));
}

#[test]
fn perturb_writes_bound_table() {
    let dir = TempDir::new().unwrap();
    let hg = write_hg(dir.path(), "toy.hg", &toy_hypergraph());
    let v = toy_v(dir.path());
    let out = dir.path().join("bounds.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_hyperrank"))
        .args(["perturb", "--input", s(&hg), "--v", s(&v), "--sigma-grid", "1e-3:1e-1", "--grid-points", "3"])
        .args(["--trials", "10", "--out", s(&out)])
        .env("HYPERRANK_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 3);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["violations"], 0);
    assert_eq!(summary["threads"], 2);
    // damping without contraction is refused
    let o = run(&["perturb", "--input", s(&hg), "--alpha", "0.5", "--trials", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
}
