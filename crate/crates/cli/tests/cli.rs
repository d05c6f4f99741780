//! End-to-end runs of the `asgpose` binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_asgpose"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary spawns")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn usage_and_exit_codes() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1), "no args is a usage error");
    let text =
        String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "{text}");

    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));

    let out = bin()
        .args(["lattice", "--m", "0", "--stats"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "invalid argument");

    let out = bin()
        .args([
            "eval",
            "--pred",
            "/nonexistent.csv",
            "--gt",
            "/also.csv",
            "--out",
            "/tmp/r.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "missing input is a validation error"
    );
}

#[test]
fn convert_chain_preserves_rotation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("poses.csv"),
        "id,pitch,yaw,roll\na,10,20,30\nb,-75,5,120\n",
    )
    .unwrap();
    assert_ok(&run_in(
        dir.path(),
        &[
            "convert",
            "--from",
            "euler",
            "--to",
            "matrix",
            "--in",
            "poses.csv",
            "--out",
            "m.jsonl",
        ],
    ));
    assert_ok(&run_in(
        dir.path(),
        &[
            "convert", "--from", "matrix", "--to", "quat", "--in", "m.jsonl", "--out", "q.jsonl",
        ],
    ));
    assert_ok(&run_in(
        dir.path(),
        &[
            "convert",
            "--from",
            "quat",
            "--to",
            "axis-angle",
            "--in",
            "q.jsonl",
            "--out",
            "aa.jsonl",
        ],
    ));
    assert_ok(&run_in(
        dir.path(),
        &[
            "convert",
            "--from",
            "axis-angle",
            "--to",
            "euler",
            "--in",
            "aa.jsonl",
            "--out",
            "back.csv",
        ],
    ));
    let text = std::fs::read_to_string(dir.path().join("back.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "id,pitch,yaw,roll");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "a");
    let angles: Vec<f64> = row[1..].iter().map(|v| v.parse().unwrap()).collect();
    for (got, want) in angles.iter().zip([10.0, 20.0, 30.0]) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    // manifest written beside the last output
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"command\": \"convert\""));
    assert!(manifest.contains("back.csv"));
}

#[test]
fn encode_then_decode_recovers_rotation() {
    let dir = tempfile::tempdir().unwrap();
    // 40 deg about the normalized axis (1, 2, 0.5)
    std::fs::write(
        dir.path().join("rot.json"),
        "{\"matrix\":[0.8106074063344108,-0.0511418296247676,0.5833525058302489,0.22939368248649866,0.9442962959807091,-0.2359725488958335,-0.5387895426148162,0.325098475326699,0.7771851839228362]}",
    )
    .unwrap();
    for head in 0..3 {
        assert_ok(&run_in(
            dir.path(),
            &[
                "encode",
                "--matrix",
                "rot.json",
                "--head",
                &head.to_string(),
                "--lambda",
                "5",
                "--eta",
                "5",
                "--m",
                "300",
                "--mode",
                "linear",
                "--out",
                &format!("d{head}.csv"),
            ],
        ));
    }
    assert_ok(&run_in(
        dir.path(),
        &[
            "decode",
            "--dists",
            "d0.csv,d1.csv,d2.csv",
            "--out",
            "decoded.json",
        ],
    ));
    let decoded = std::fs::read_to_string(dir.path().join("decoded.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&decoded).unwrap();
    let flat: Vec<f64> = value["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let orig = [
        0.8106074063344108,
        -0.0511418296247676,
        0.5833525058302489,
        0.22939368248649866,
        0.9442962959807091,
        -0.2359725488958335,
        -0.5387895426148162,
        0.325098475326699,
        0.7771851839228362,
    ];
    for (got, want) in flat.iter().zip(orig) {
        assert!((got - want).abs() < 0.05, "{got} vs {want}");
    }
}

#[test]
fn eval_reports_aggregates_and_rejects_mismatched_ids() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("gt.csv"),
        "id,pitch,yaw,roll\na,0,0,0\nb,10,0,0\n",
    )
    .unwrap();
    std::fs::write(
        dir.path().join("pred.csv"),
        "id,pitch,yaw,roll\na,0,10,0\nb,10,0,0\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "eval",
            "--pred",
            "pred.csv",
            "--gt",
            "gt.csv",
            "--format",
            "euler",
            "--out",
            "report.csv",
        ],
    );
    assert_ok(&out);
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 4);
    assert!(report.lines().last().unwrap().starts_with("aggregate,"));

    std::fs::write(
        dir.path().join("pred2.csv"),
        "id,pitch,yaw,roll\nzz,0,10,0\n",
    )
    .unwrap();
    let out = run_in(
        dir.path(),
        &[
            "eval",
            "--pred",
            "pred2.csv",
            "--gt",
            "gt.csv",
            "--format",
            "euler",
            "--out",
            "r2.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unmatched ids"));
}

#[test]
fn gradcheck_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "gradcheck",
            "--m",
            "24",
            "--seeds",
            "3",
            "--step",
            "1e-5",
            "--out",
            "grad.json",
        ],
    );
    assert_ok(&out);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("grad.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
    assert!(report["max_rel_err"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("lab.cfg"), "m = 24\nstats = true\n").unwrap();
    let out = run_in(dir.path(), &["lattice", "--config", "lab.cfg"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("m=24"));

    // explicit flag wins over the config value
    let out = run_in(dir.path(), &["lattice", "--config", "lab.cfg", "--m", "16"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("m=16"));

    // JSON config form
    std::fs::write(dir.path().join("lab.json"), "{\"m\": 12, \"stats\": true}").unwrap();
    let out = run_in(dir.path(), &["lattice", "--config", "lab.json"]);
    assert_ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("m=12"));
}

#[test]
fn train_toy_writes_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "train-toy",
            "--m",
            "20",
            "--epochs",
            "2",
            "--batch",
            "8",
            "--n-samples",
            "24",
            "--noise",
            "0",
            "--seed",
            "3",
            "--ablation",
            "--out",
            "run",
        ],
    );
    assert_ok(&out);
    for name in [
        "history.csv",
        "params.csv",
        "model.json",
        "comparison.csv",
        "manifest.json",
    ] {
        assert!(dir.path().join("run").join(name).exists(), "missing {name}");
    }
    let history = std::fs::read_to_string(dir.path().join("run/history.csv")).unwrap();
    assert_eq!(history.lines().count(), 4, "header + epochs 0..=2");
    let comparison = std::fs::read_to_string(dir.path().join("run/comparison.csv")).unwrap();
    assert!(comparison.contains("adaptive") && comparison.contains("fixed"));
}

#[test]
fn bias_lab_and_render_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        &[
            "bias-lab", "--m", "100", "--trials", "10", "--seed", "1", "--out", "lab",
        ],
    );
    assert_ok(&out);
    for name in [
        "bias_curve.csv",
        "bias_curve.svg",
        "decode_angle_hist.csv",
        "decode_angle_hist.svg",
        "summary.txt",
        "manifest.json",
    ] {
        assert!(dir.path().join("lab").join(name).exists(), "missing {name}");
    }

    let out = run_in(
        dir.path(),
        &[
            "render",
            "--m",
            "64",
            "--pairs",
            "1,1;5,5;1,5;5,1",
            "--out",
            "fig",
        ],
    );
    assert_ok(&out);
    let stems = ["asg_l1_e1", "asg_l5_e5", "asg_l1_e5", "asg_l5_e1"];
    let csvs: Vec<Vec<u8>> = stems
        .iter()
        .map(|stem| {
            let path = dir.path().join("fig").join(format!("{stem}.csv"));
            assert!(dir.path().join("fig").join(format!("{stem}.svg")).exists());
            std::fs::read(path).unwrap()
        })
        .collect();
    // the four concentration pairs produce four distinct distributions
    for i in 0..csvs.len() {
        for j in (i + 1)..csvs.len() {
            assert_ne!(csvs[i], csvs[j], "{} matches {}", stems[i], stems[j]);
        }
    }
}
