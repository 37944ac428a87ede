use std::path::Path;
use std::process::{Command, Output};

fn casper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casper"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn simulate_writes_one_dataset_per_trial_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = casper(&[
            "simulate",
            "--nodes",
            "6",
            "--samples",
            "50",
            "--trials",
            "3",
            "--seed",
            "4",
            "--out",
            p(&out_dir),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        out_dir.join("ER2-d6-n50-linear-mu0")
    };
    let a = run("a");
    let b = run("b");
    for t in 0..3 {
        let stem = format!("trial_{t:03}");
        let data = std::fs::read_to_string(a.join(format!("{stem}_data.csv"))).unwrap();
        assert_eq!(data.lines().count(), 51);
        assert!(data.starts_with("X1,X2,X3,X4,X5,X6\n"));
        let truth = std::fs::read_to_string(a.join(format!("{stem}_truth.csv"))).unwrap();
        assert_eq!(truth.lines().count(), 6);
        assert!(truth
            .lines()
            .all(|l| l.split(',').all(|c| c == "0" || c == "1")));
        for suffix in ["data", "truth", "weights"] {
            let f = format!("{stem}_{suffix}.csv");
            assert_eq!(
                std::fs::read(a.join(&f)).unwrap(),
                std::fs::read(b.join(&f)).unwrap(),
                "{f}"
            );
        }
    }
}

#[test]
fn sf_degree_ten_requests_two_hundred_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = casper(&[
        "simulate",
        "--graph",
        "sf",
        "--degree",
        "10",
        "--nodes",
        "20",
        "--samples",
        "5",
        "--trials",
        "1",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["degrees"][0], 10);
    let truth = std::fs::read_to_string(
        dir.path()
            .join("SF10-d20-n5-linear-mu0/trial_000_truth.csv"),
    )
    .unwrap();
    let edges = truth.matches('1').count();
    // Barabási–Albert attachment realizes k (d - k) of the k d requested edges.
    assert_eq!(edges, 100);
}

#[test]
fn fit_two_node_chain_yields_one_edge() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("chain.csv");
    let mut text = String::from("a,b\n");
    for k in 0..400 {
        let x = ((k * 7919) % 400) as f64 / 100.0 - 2.0;
        text.push_str(&format!("{x},{}\n", 1.5 * x));
    }
    write(&data, &text);
    let out_dir = dir.path().join("fit");
    let out = casper(&[
        "fit",
        "--data",
        p(&data),
        "--method",
        "casper",
        "--out",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let pruned = std::fs::read_to_string(out_dir.join("casper_pruned.csv")).unwrap();
    assert_eq!(pruned.matches('1').count(), 1, "{pruned}");
    assert!(out_dir.join("casper.json").exists());
    assert!(out_dir.join("casper_weighted.csv").exists());
    assert!(out_dir.join("manifest.json").exists());
    let model = std::fs::read_to_string(out_dir.join("casper_model.json")).unwrap();
    assert!(model.contains("magic"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write(&data, "a,b\n1,2\n3,x\n");
    assert_eq!(
        code(&casper(&["fit", "--data", p(&data), "--method", "ges"])),
        3
    );
    assert_eq!(
        code(&casper(&["fit", "--data", p(&data), "--method", "notears"])),
        2
    );
    assert_eq!(code(&casper(&["bench", "--graph", "torus"])), 3);
    assert_eq!(code(&casper(&["no-such-command"])), 3);
    assert_eq!(code(&casper(&["--help"])), 0);
    assert_eq!(code(&casper(&["--version"])), 0);
    let out = casper(&["ingest-check", "--data", p(&data)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn eval_reports_metrics_and_mismatches() {
    let dir = tempfile::tempdir().unwrap();
    let empty11 = dir.path().join("empty.csv");
    write(&empty11, &vec![["0"; 11].join(","); 11].join("\n"));
    let out = casper(&[
        "eval",
        "--truth",
        "sachs",
        "--estimate",
        p(&empty11),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["shd"], 17);
    assert_eq!(report["tpr"], 0.0);
    assert!(dir.path().join("metrics.json").exists());

    let truth = dir.path().join("t.csv");
    write(&truth, "0,1,0\n0,0,1\n0,0,0\n");
    let out = casper(&["eval", "--truth", p(&truth), "--estimate", p(&truth)]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        (
            report["shd"].as_u64(),
            report["sid"].as_u64(),
            report["tpr"].as_f64()
        ),
        (Some(0), Some(0), Some(1.0))
    );

    let cyclic = dir.path().join("c.csv");
    write(&cyclic, "0,1,0\n0,0,1\n1,0,0\n");
    let out = casper(&["eval", "--truth", p(&truth), "--estimate", p(&cyclic)]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["sid"].is_null());
    assert_eq!(report["shd"], 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    assert_eq!(
        code(&casper(&[
            "eval",
            "--truth",
            p(&truth),
            "--estimate",
            p(&empty11)
        ])),
        2
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    write(
        &cfg,
        "[experiment]\nnodes = 7\nsamples = 20\ntrials = 2\ngraph = \"er\"\n\n[learner]\nomega = 0.25\n",
    );
    let out_dir = dir.path().join("sim");
    let out = casper(&[
        "simulate",
        "--config",
        p(&cfg),
        "--trials",
        "1",
        "--out",
        p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["config"]["nodes"], 7);
    assert_eq!(manifest["config"]["trials"], 1);
    assert_eq!(manifest["config"]["learner"]["omega"], 0.25);

    let bad = dir.path().join("bad.toml");
    write(&bad, "[experiment]\nnodez = 7\n");
    assert_eq!(code(&casper(&["simulate", "--config", p(&bad)])), 2);
}

#[test]
fn manifest_hash_ignores_config_key_order() {
    let dir = tempfile::tempdir().unwrap();
    let hash_for = |name: &str, text: &str| {
        let cfg = dir.path().join(format!("{name}.toml"));
        write(&cfg, text);
        let out_dir = dir.path().join(name);
        let out = casper(&["simulate", "--config", p(&cfg), "--out", p(&out_dir)]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
                .unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };
    let a = hash_for("a", "[experiment]\nnodes = 4\nsamples = 10\ntrials = 1\n[learner]\nlambda1 = 0.02\nk_inner = 2\n");
    let b = hash_for("b", "[learner]\nk_inner = 2\nlambda1 = 0.02\n[experiment]\ntrials = 1\nsamples = 10\nnodes = 4\n");
    let c = hash_for("c", "[experiment]\nnodes = 4\nsamples = 10\ntrials = 1\n[learner]\nlambda1 = 0.03\nk_inner = 2\n");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn bench_noise_sweep_emits_curves() {
    let dir = tempfile::tempdir().unwrap();
    let out = casper(&[
        "bench",
        "--graph",
        "sf",
        "--nodes",
        "8",
        "--samples",
        "30",
        "--trials",
        "2",
        "--method",
        "random",
        "--noise-mean",
        "0.2,0.4,0.6,0.8,1.0",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let long = std::fs::read_to_string(dir.path().join("long.csv")).unwrap();
    let settings: std::collections::BTreeSet<&str> = long
        .lines()
        .skip(1)
        .filter(|l| l.contains(",shd,"))
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(settings.len(), 5);
    let aggregate = std::fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert!(aggregate.starts_with("method,setting,metric,mean,std\n"));
    let text = std::fs::read_to_string(dir.path().join("aggregate.txt")).unwrap();
    assert!(text.contains('±'));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["timings"].as_array().unwrap().len(), 10);
    assert!(manifest["notes"].to_string().contains("random baseline"));
}

#[test]
fn ingest_check_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.csv");
    write(&data, "only\n1\n2\n3\n");
    let out = casper(&["ingest-check", "--data", p(&data)]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        (report["n"].as_u64(), report["d"].as_u64()),
        (Some(3), Some(1))
    );
    assert_eq!(report["standardized"], true);
}
