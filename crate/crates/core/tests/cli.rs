mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use common::*;
use tempfile::TempDir;

fn bilink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bilink"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A random bipartite edge list with string labels `u<i>` and `i<j>`.
fn write_graph(dir: &Path, seed: u64) -> PathBuf {
    let mut r = rng(seed);
    let g = random_bipartite(&mut r, 30, 40, 0.2);
    let mut text = String::from("% bip unweighted\n");
    for e in g.edges() {
        text.push_str(&format!("u{} i{}\n", e.left, e.right));
    }
    let p = dir.join(format!("graph{seed}.tsv"));
    fs::write(&p, text).unwrap();
    p
}

fn write_unipartite(dir: &Path, name: &str, g: &bilink::graph::UnipartiteGraph) -> PathBuf {
    let text: String = g.edges().iter().map(|(a, b)| format!("{a} {b}\n")).collect();
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn fit_writes_one_record_per_family() {
    let dir = TempDir::new().unwrap();
    let input = write_graph(dir.path(), 1);
    let out_dir = dir.path().join("out");
    let out = bilink(&[
        "fit", "--input", path(&input), "--k", "12",
        "--families", "sinh,neumann,poly,nnpoly,reduction",
        "--output-dir", path(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for family in ["sinh", "neumann", "poly", "nnpoly", "reduction"] {
        let record = fs::read_to_string(out_dir.join(format!("fit_{family}.txt"))).unwrap();
        assert!(record.contains("residual="));
        let curve = fs::read_to_string(out_dir.join(format!("curve_{family}.csv"))).unwrap();
        assert!(curve.starts_with("sigma,target,fitted\n"));
    }
    assert!(out_dir.join("model.tsv").exists());
    let manifest = fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.starts_with("command=fit\n"));
    assert!(manifest.contains("seed=1\n"));
}

#[test]
fn fit_recovers_synthetic_sinh() {
    let dir = TempDir::new().unwrap();
    let mut csv = String::from("sigma,target\n");
    for i in 0..32 {
        let s = 10.0 - 0.25 * i as f64;
        csv.push_str(&format!("{s},{}\n", 1.5 * (0.3 * s).sinh()));
    }
    let targets = dir.path().join("targets.csv");
    fs::write(&targets, csv).unwrap();
    let out = bilink(&["fit", "--targets", path(&targets), "--families", "sinh", "--output-dir", path(dir.path())]);
    assert_eq!(code(&out), 0);
    let record = fs::read_to_string(dir.path().join("fit_sinh.txt")).unwrap();
    let residual: f64 = record
        .lines()
        .find_map(|l| l.strip_prefix("residual="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual < 1e-8, "residual {residual}");
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.tsv");
    assert_eq!(code(&bilink(&["fit", "--input", path(&missing)])), 1);
    assert_eq!(code(&bilink(&["evaluate", "--input", path(&missing)])), 1);
    assert_eq!(code(&bilink(&["evaluate", "--no-such-flag"])), 1);
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a b\nc\n").unwrap();
    let out = bilink(&["fit", "--input", path(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    assert_eq!(code(&bilink(&["--help"])), 0);
}

#[test]
fn evaluate_is_deterministic_and_table_shaped() {
    let dir = TempDir::new().unwrap();
    let input = write_graph(dir.path(), 2);
    let run = |name: &str, families: &str| {
        let out_dir = dir.path().join(name);
        let out = bilink(&[
            "evaluate", "--input", path(&input), "--k", "8", "--seed", "3",
            "--families", families, "--threads", "2", "--output-dir", path(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        fs::read_to_string(out_dir.join("report.csv")).unwrap()
    };
    let first = run("a", "poly,nnpoly,sinh,reduction,neumann,pref");
    let second = run("b", "poly,nnpoly,sinh,reduction,neumann,pref");
    assert_eq!(first, second);
    let header: Vec<&str> = first.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 3 + 6);
    assert_eq!(first.lines().count(), 2);

    let pref_only = run("c", "pref");
    assert_eq!(pref_only.lines().next().unwrap().split(',').count(), 4);
    assert!(dir.path().join("c/report.txt").exists());
    assert!(dir.path().join("c/manifest.txt").exists());
}

fn fit_model(dir: &Path, input: &Path) -> PathBuf {
    let out_dir = dir.join("model");
    let out = bilink(&["fit", "--input", path(input), "--k", "10", "--families", "poly", "--output-dir", path(&out_dir)]);
    assert_eq!(code(&out), 0);
    out_dir
}

#[test]
fn predict_ranks_unseen_items() {
    let dir = TempDir::new().unwrap();
    let input = write_graph(dir.path(), 3);
    let model_dir = fit_model(dir.path(), &input);
    let args = |node: &str| {
        vec![
            "predict".to_string(), "--model".into(), path(&model_dir.join("model.tsv")).into(),
            "--transform".into(), path(&model_dir.join("fit_poly.txt")).into(),
            "--input".into(), path(&input).into(), "--node".into(), node.into(), "--top".into(), "5".into(),
        ]
    };
    let run = |node: &str| {
        let a = args(node);
        bilink(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let out = run("u0");
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(!lines.is_empty() && lines.len() <= 5);
    let known: Vec<String> = fs::read_to_string(&input)
        .unwrap()
        .lines()
        .filter_map(|l| l.strip_prefix("u0 ").map(str::to_string))
        .collect();
    let mut last = f64::INFINITY;
    for line in &lines {
        let cols: Vec<&str> = line.split('\t').collect();
        assert_eq!(cols[0], "u0");
        assert!(!known.iter().any(|k| k == cols[1]), "training edge {line} predicted");
        let s: f64 = cols[2].parse().unwrap();
        assert!(s <= last);
        last = s;
    }
    assert_eq!(run("u0").stdout, out.stdout);
    assert_eq!(code(&run("nobody")), 1);
}

#[test]
fn numerical_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let input = write_graph(dir.path(), 4);
    let model_dir = fit_model(dir.path(), &input);
    let transform = dir.path().join("pole.txt");
    fs::write(&transform, "family=neumann\nalpha=10\nbeta=1\n").unwrap();
    let out = bilink(&[
        "predict", "--model", path(&model_dir.join("model.tsv")), "--transform", path(&transform),
        "--input", path(&input), "--all",
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bipartivity_emits_one_line_per_graph() {
    let dir = TempDir::new().unwrap();
    let kb = write_unipartite(dir.path(), "k34.txt", &complete_bipartite(3, 4));
    let kc = write_unipartite(dir.path(), "k6.txt", &complete(6));
    let out_dir = dir.path().join("curves");
    let out = bilink(&["bipartivity", "--input", path(&kb), path(&kc), "--output-dir", path(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].contains("\tnearly-bipartite\t"));
    assert!(lines[1].contains("\tnot-bipartite\t"));
    let csv = fs::read_to_string(out_dir.join("bipartivity_k34.csv")).unwrap();
    assert!(csv.starts_with("lambda,target,sinh_fit,exp_fit\n"));
}

#[test]
fn pathweights_lists_series_coefficients() {
    let out = bilink(&["pathweights", "--family", "sinh", "--alpha", "1", "--max-power", "5"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "power,weight");
    let weights: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(weights.len(), 3);
    assert!((weights[0] - 1.0).abs() < 1e-15);
    assert!((weights[1] - 1.0 / 6.0).abs() < 1e-15);
    assert!((weights[2] - 1.0 / 120.0).abs() < 1e-15);

    let zero = bilink(&["pathweights", "--family", "neumann", "--alpha", "0"]);
    let text = String::from_utf8(zero.stdout).unwrap();
    assert!(text.lines().skip(1).all(|r| r.split(',').nth(1).unwrap().parse::<f64>().unwrap() == 0.0));
}
