use std::path::{Path, PathBuf};
use std::process::Command;

use c3::cli::ClusteringDoc;
use c3::synth::{make_random, Level};
use c3::weights::EdgeWeights;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_c3"))
}

fn data(f: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(f).display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn toy_cluster(out: &Path, extra: &[&str]) -> (i32, String, String) {
    let mut args = vec![
        "cluster".to_string(),
        "--alteration".into(),
        data("alterations.tsv"),
        "--cnv".into(),
        data("cnv.tsv"),
        "--network".into(),
        data("network.txt"),
        "--drivers".into(),
        data("drivers.txt"),
        "--top-percentile".into(),
        "1".into(),
        "--K".into(),
        "2".into(),
        "--trials".into(),
        "100".into(),
        "--out".into(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    run(&refs)
}

#[test]
fn missing_network_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "cluster",
        "--alteration",
        &data("alterations.tsv"),
        "--scheme",
        "NI-ME-CO",
        "--w1",
        "0.5",
        "--w2",
        "0.5",
        "--K",
        "2",
        "--out",
        &tmp.path().display().to_string(),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("--network"), "{err}");
    let missing = tmp.path().join("nope.txt").display().to_string();
    let (code, _, err) = run(&["cluster", "--alteration", &data("alterations.tsv"), "--network", &missing, "--K", "2"]);
    assert_eq!(code, 2);
    assert!(err.contains("--network"), "{err}");
    assert!(std::fs::read_dir(tmp.path()).unwrap().next().is_none());
}

#[test]
fn toy_pipeline_end_to_end() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let (code, stdout, err) = toy_cluster(&out, &["--dump-lp", "--dump-weights"]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("clusters:"));
    for f in [
        "manifest.json",
        "clustering.json",
        "clusters.txt",
        "lp_summary.json",
        "lp_solution.tsv",
        "weights.tsv",
        "report.json",
        "report.tsv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let doc: ClusteringDoc = serde_json::from_str(&std::fs::read_to_string(out.join("clustering.json")).unwrap()).unwrap();
    let mut genes: Vec<String> = doc.blocks.iter().flatten().cloned().collect();
    assert!(doc.blocks.iter().all(|b| !b.is_empty() && b.len() <= 3));
    genes.sort();
    let mut want: Vec<String> = ["AKT1", "CDKN2A", "EGFR", "MDM2", "NF1", "PIK3CA", "PTEN", "TP53"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    want.sort();
    assert_eq!(genes, want);

    // the dumped weights reproduce the reported cost
    let w = EdgeWeights::read_tsv(&out.join("weights.tsv")).unwrap();
    let pos = |g: &str| w.genes().iter().position(|x| x == g).unwrap();
    let mut labels = vec![0; w.n()];
    for (b, block) in doc.blocks.iter().enumerate() {
        for g in block {
            labels[pos(g)] = b;
        }
    }
    let cost = c3::rounding::clustering_cost(&c3::Clustering::from_labels(&labels), &w);
    assert!((cost - doc.cost).abs() < 1e-6);

    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("lp_summary.json")).unwrap()).unwrap();
    assert!(summary["max_violation"].as_f64().unwrap() <= 1e-6);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["config"]["rounding"]["k"], 2);

    // re-scoring the written clustering gives the same report
    let rescored = tmp.path().join("eval");
    let (code, _, err) = run(&[
        "eval",
        "--clustering",
        &out.join("clustering.json").display().to_string(),
        "--alteration",
        &data("alterations.tsv"),
        "--cnv",
        &data("cnv.tsv"),
        "--network",
        &data("network.txt"),
        "--drivers",
        &data("drivers.txt"),
        "--trials",
        "100",
        "--out",
        &rescored.display().to_string(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(
        std::fs::read_to_string(out.join("report.tsv")).unwrap(),
        std::fs::read_to_string(rescored.join("report.tsv")).unwrap()
    );
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, format!("alteration = {}\nK = 5\nalpha = 0.2\n", data("alterations.tsv"))).unwrap();
    let (code, stdout, err) = run(&["cluster", "--config", &cfg.display().to_string(), "--K", "3", "--dry-run"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["config"]["rounding"]["k"], 3);
    assert_eq!(v["config"]["rounding"]["alpha"], 0.2);
    assert!(!Path::new("c3-out").exists() || Path::new("c3-out").is_dir());
}

#[test]
fn dry_run_validates_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("never");
    let (code, stdout, _) = toy_cluster(&out, &["--dry-run"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("\"command\": \"cluster\""));
    assert!(!out.exists());
    let (code, _, err) = toy_cluster(&out, &["--alpha", "0.5"]);
    assert_eq!(code, 2);
    assert!(err.contains("alpha"), "{err}");
}

#[test]
fn synth_echoes_seed_and_bounds_ratio() {
    let (code, stdout, err) = run(&[
        "synth", "--gamma", "0.9", "--flips", "0", "--repeats", "1", "--random-instances", "5", "--random-n", "8",
        "--K", "6", "--seed", "17",
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.starts_with("# seed=17\n"));
    let rows: Vec<Vec<&str>> = stdout.lines().skip(2).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0][0], "planted");
    assert_eq!(rows[0][6], "true");
    for r in &rows[1..] {
        let ratio: f64 = r[11].parse().unwrap();
        assert!((1.0..=9.0).contains(&ratio));
    }
}

#[test]
fn oracle_check_on_weight_table() {
    let tmp = tempfile::tempdir().unwrap();
    let levels = [Level { value: 0.1, probability: 1.0 }, Level { value: 0.9, probability: 1.0 }];
    let w = make_random(7, &levels, 2).unwrap();
    let path: PathBuf = tmp.path().join("w.tsv");
    w.write_tsv(&path).unwrap();
    // the dump keeps 9 significant digits
    let back = EdgeWeights::read_tsv(&path).unwrap();
    assert_eq!(back.genes(), w.genes());
    for (u, v) in w.pairs() {
        assert!((back.plus(u, v) - w.plus(u, v)).abs() <= 1e-9);
        assert!((back.minus(u, v) - w.minus(u, v)).abs() <= 1e-9);
    }
    let (code, stdout, err) = run(&["oracle-check", "--weights", &path.display().to_string(), "--K", "2"]);
    assert_eq!(code, 0, "{err}");
    let v: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(v["lp_below_optimum"], true);
    assert_eq!(v["within_nine"], true);
    assert!(v["rounded_cost"].as_f64().unwrap() <= v["charge_bound"].as_f64().unwrap() + 1e-6);

    std::fs::write(&path, "gene_u\tgene_v\tw_plus\tw_minus\na\tb\t0.2\t0.3\n").unwrap();
    let (code, _, _) = run(&["oracle-check", "--weights", &path.display().to_string()]);
    assert_eq!(code, 2);
}

#[test]
fn driver_distance_with_all_genes() {
    let tmp = tempfile::tempdir().unwrap();
    let drivers = tmp.path().join("all.txt");
    std::fs::write(&drivers, "TP53\nMDM2\nCDKN2A\nPIK3CA\nPTEN\nAKT1\nEGFR\nNF1\n").unwrap();
    let out = tmp.path().join("dd");
    let (code, stdout, err) = run(&[
        "driver-distance", "--network", &data("network.txt"), "--drivers", &drivers.display().to_string(), "--pairs",
        "1000", "--trials", "50", "--out", &out.display().to_string(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("28 random pairs"), "{stdout}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("driver_distance.json")).unwrap()).unwrap();
    assert_eq!(v["random_histogram"], v["driver_histogram"]);
    assert_eq!(v["p_value"], 1.0);
    // toy network by hand: TP53-MDM2-CDKN2A triangle is disconnected from the rest
    assert_eq!(v["random_unreachable"], 15);
    assert_eq!(v["random_histogram"]["1"], 8);
}
