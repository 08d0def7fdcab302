//! End-to-end checks of the `fedgan` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

mod common;

use common::write_synthetic_idx;

fn fedgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fedgan")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn tiny_config(dir: &Path, extra: &str) -> PathBuf {
    let text = format!(
        "preset = fig3-single-minority
[dataset]
per_class = 300
[partition]
minority_count = 60
majority_count = 60
[train]
epochs = 3
batch_size = 16
[federation]
aggregator_epochs = 3
samples_per_client = 50
seed = 21
[report]
probe_samples = 300
dump_samples = 40
[output]
dir = {}
{extra}",
        dir.join("run").display()
    );
    let path = dir.join("tiny.cfg");
    fs::write(&path, text).unwrap();
    path
}

fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn run_writes_artifacts_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), "");
    let o = fedgan(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let run = tmp.path().join("run");
    for alg in ["fedgan", "biasfree"] {
        for f in [
            "round_1.csv",
            "round_2.csv",
            "round_3.csv",
            "bias_report.csv",
            "bias_report.json",
            "bias_by_round.csv",
            "samples.csv",
            "generator.fgbf",
            "discriminator.fgbf",
            "manifest",
        ] {
            assert!(run.join(alg).join(f).is_file(), "{alg}/{f}");
        }
    }
    let manifest = fs::read_to_string(run.join("biasfree/manifest")).unwrap();
    assert!(manifest.contains("# seed = 21"));
    assert!(manifest.contains("# config_sha256 = "));
    let first = read_tree(&run);

    fs::remove_dir_all(&run).unwrap();
    let o = fedgan(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(first, read_tree(&run));

    // The manifest alone reproduces the run.
    let copy = tmp.path().join("manifest.cfg");
    fs::copy(run.join("fedgan/manifest"), &copy).unwrap();
    fs::remove_dir_all(&run).unwrap();
    let o = fedgan(&["run", "--config", copy.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(first, read_tree(&run));
}

#[test]
fn single_algorithm_and_output_override() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), "");
    let out = tmp.path().join("elsewhere");
    let o = fedgan(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--set",
        "federation.algorithm=fedgan",
        "--set",
        "federation.rounds=1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("fedgan/round_1.csv").is_file());
    assert!(!out.join("fedgan/round_2.csv").exists());
    assert!(!out.join("biasfree").exists());
}

#[test]
fn invalid_configs_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tiny_config(tmp.path(), "[federation]\nclients = 0\n");
    let o = fedgan(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("federation.clients"), "{}", stderr(&o));

    let cfg = tiny_config(tmp.path(), "[partition]\nmajority_count = 5000\n");
    let o = fedgan(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("`majority_count` already set"), "{}", stderr(&o));

    let path = tmp.path().join("short.cfg");
    fs::write(
        &path,
        "preset = fig3-single-minority\n[dataset]\nper_class = 100\n[federation]\nseed = 1\n",
    )
    .unwrap();
    let o = fedgan(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("short by"), "{}", stderr(&o));

    let o = fedgan(&["run", "--config", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = fedgan(&["run"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn compare_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    let report = |share: f64| {
        format!(
            "class,fraction\n0,{share}\n1,{}\nbalance_entropy,0.5\nminority_share,{share}\nsamples,100\nminority_classes,0\n",
            1.0 - share
        )
    };
    fs::write(a.join("bias_report.csv"), report(0.0)).unwrap();
    fs::write(b.join("bias_report.csv"), report(0.2)).unwrap();

    let o = fedgan(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("+0.2000"));
    let o = fedgan(&["compare", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let o = fedgan(&["compare", b.to_str().unwrap(), a.to_str().unwrap()]);
    assert_eq!(code(&o), 3);

    fs::write(b.join("bias_report.csv"), "class,fraction\n0,0.5\n1,oops\n").unwrap();
    let o = fedgan(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("bias_report.csv:3:"), "{}", stderr(&o));

    let o = fedgan(&["compare", a.to_str().unwrap(), tmp.path().join("none").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn grid_dimensions_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let mut csv: String = (0..196).map(|i| format!("x{i},")).collect();
    csv.push_str("mode\n");
    for _ in 0..25 {
        csv.push_str(&"-1,".repeat(196));
        csv.push_str("0\n");
    }
    let samples = tmp.path().join("s.csv");
    fs::write(&samples, csv).unwrap();
    let out = tmp.path().join("g.pgm");
    let o = fedgan(&[
        "grid",
        samples.to_str().unwrap(),
        "--rows",
        "5",
        "--cols",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let pgm = fs::read(&out).unwrap();
    let header = b"P5\n70 70\n255\n";
    assert!(pgm.starts_with(header));
    assert_eq!(pgm.len(), header.len() + 70 * 70);
    assert!(pgm[header.len()..].iter().all(|&p| p == 0));

    fs::write(&samples, "x0,x1,x2\n1,2,3\n").unwrap();
    let o = fedgan(&["grid", samples.to_str().unwrap(), "--rows", "1", "--cols", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("perfect square"), "{}", stderr(&o));
}

#[test]
fn image_runs_write_reproducible_grids() {
    let tmp = tempfile::tempdir().unwrap();
    let (ip, lp) = write_synthetic_idx(tmp.path(), 40, 4);
    let out = tmp.path().join("img");
    let args = |o: &Path| -> Vec<String> {
        [
            "run",
            "--preset",
            "fig3-single-minority-mnist",
            "--out",
            o.to_str().unwrap(),
            "--set",
            &format!("dataset.images={}", ip.display()),
            "--set",
            &format!("dataset.labels={}", lp.display()),
            "--set",
            "dataset.downsample=4",
            "--set",
            "partition.minority_count=20",
            "--set",
            "partition.majority_count=8",
            "--set",
            "model.hidden_width=8",
            "--set",
            "model.latent_dim=3",
            "--set",
            "train.epochs=2",
            "--set",
            "train.batch_size=4",
            "--set",
            "federation.aggregator_epochs=2",
            "--set",
            "federation.samples_per_client=8",
            "--set",
            "report.grid_rows=2",
            "--set",
            "report.grid_cols=3",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    };
    let run = |o: &Path| {
        let a = args(o);
        let refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let r = fedgan(&refs);
        assert_eq!(code(&r), 0, "{}", stderr(&r));
    };
    run(&out);
    let pgm = fs::read(out.join("biasfree/grid.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n12 8\n255\n"));
    assert_eq!(pgm.len(), b"P5\n12 8\n255\n".len() + 96);
    let report = fs::read_to_string(out.join("fedgan/bias_report.csv")).unwrap();
    assert!(report.starts_with("class,fraction\n0,"));
    assert!(report.contains("\n3,"));
    let first = read_tree(&out);
    fs::remove_dir_all(&out).unwrap();
    run(&out);
    assert_eq!(first, read_tree(&out));
}

#[test]
fn presets_listing() {
    let o = fedgan(&["presets"]);
    assert_eq!(code(&o), 0);
    let names = String::from_utf8_lossy(&o.stdout).into_owned();
    for n in ["fig3-single-minority", "fig3-equal-total", "fig4-multi-minority", "fig4-iid"] {
        assert!(names.lines().any(|l| l == n), "{n}");
        assert!(names.lines().any(|l| l == format!("{n}-mnist")), "{n}-mnist");
    }
    let o = fedgan(&["presets", "fig3-equal-total"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("scheme = equal-total"));
    assert_eq!(code(&fedgan(&["presets", "nope"])), 1);
}
