use std::process::{Command, Output};

use serde_json::Value;

fn lemtree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lemtree")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn coeffs_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    let o = lemtree(&["coeffs", "--n-max", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,k,a_nk"));
    // Size 6 has 61 trees: row n = 5.
    let total: u64 = lines
        .filter(|l| l.starts_with("5,"))
        .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 61);
}

#[test]
fn sample_tree_lines_are_valid_trees() {
    let o = lemtree(&["sample-tree", "--size", "9", "--seed", "3", "--count", "4"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["size"], 9);
        let parent = v["parent"].as_array().unwrap();
        assert_eq!(parent.len(), 8);
        for (i, p) in parent.iter().enumerate() {
            let p = p.as_u64().unwrap() as usize;
            assert!(p >= 1 && p < i + 2);
        }
    }
    let again = lemtree(&["sample-tree", "--size", "9", "--seed", "3", "--count", "4"]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn pgf_is_exact() {
    let o = lemtree(&["pgf", "--size", "4"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pgf"][1]["num"], "4");
    assert_eq!(v["pgf"][1]["den"], "5");
    assert_eq!(v["mean"]["value"], 0.8);
}

#[test]
fn exit_codes() {
    assert_eq!(
        code(&lemtree(&["clt", "--size", "1", "--trials", "5", "--seed", "1"])),
        2
    );
    assert_eq!(
        code(&lemtree(&[
            "simulate",
            "--model",
            "no_such_model",
            "--degree",
            "5",
            "--trials",
            "2",
            "--seed",
            "1",
            "--jobs",
            "1"
        ])),
        2
    );
    assert_eq!(
        code(&lemtree(&[
            "sweep",
            "--model",
            "kac",
            "--degrees",
            "9,5",
            "--trials",
            "2",
            "--seed",
            "1"
        ])),
        2
    );
    assert_eq!(code(&lemtree(&["simulate", "--degree", "5"])), 2);
    // Almost every Gaussian Chebyshev draw has tied critical values.
    let o = lemtree(&[
        "simulate",
        "--model",
        "gaussian_chebyshev",
        "--degree",
        "12",
        "--trials",
        "10",
        "--seed",
        "1",
        "--jobs",
        "1",
    ]);
    assert_eq!(code(&o), 3);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["overall"]["rejection_rate"].as_f64().unwrap() > 0.2);
}

#[test]
fn simulate_writes_files_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (jobs, sub) in [("1", "a"), ("8", "b")] {
        let out = dir.path().join(sub);
        let o = lemtree(&[
            "simulate",
            "--model",
            "iid_uniform_disk",
            "--degree",
            "10",
            "--trials",
            "6",
            "--seed",
            "5",
            "--jobs",
            jobs,
            "--out-dir",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
        let csv = std::fs::read(out.join("trials.csv")).unwrap();
        let json = std::fs::read(out.join("summary.json")).unwrap();
        assert_eq!(json, o.stdout);
        outputs.push((csv, json));
    }
    assert_eq!(outputs[0], outputs[1]);
    let header = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(
        header.starts_with("trial,degree,seed,stream,rejected,reason,n0,n1,n2,paired_fraction,small_petal_fraction\n")
    );
}

#[test]
fn trace_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("p.json");
    let out = dir.path().join("t.json");
    std::fs::write(&poly, r#"{"monomial_coeffs": [[-1, 0], [0, 0], [1, 0]]}"#).unwrap();
    let o = lemtree(&[
        "trace",
        "--poly",
        poly.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["complete"], true);
    assert_eq!(v["components"].as_array().unwrap().len(), 1);

    // z³ - 3z has two critical points with equal |p|: partial output, exit 4.
    std::fs::write(&poly, r#"{"monomial_coeffs": [[0, 0], [-3, 0], [0, 0], [1, 0]]}"#).unwrap();
    let o = lemtree(&[
        "trace",
        "--poly",
        poly.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["complete"], false);
    assert!(v["error"].is_string());

    std::fs::write(&poly, "not json").unwrap();
    let o = lemtree(&[
        "trace",
        "--poly",
        poly.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn pairing_and_chebyshev_run() {
    let o = lemtree(&[
        "pairing",
        "--model",
        "iid_uniform_sphere",
        "--degree",
        "20",
        "--trials",
        "4",
        "--r",
        "11",
        "--seed",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["statistic"], "paired_fraction");
    let o = lemtree(&[
        "chebyshev-table",
        "--max-degree",
        "40",
        "--step",
        "10",
        "--trials",
        "30",
        "--seed",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
    assert!(v["regression"]["r_squared"].as_f64().unwrap() > 0.9);
}
