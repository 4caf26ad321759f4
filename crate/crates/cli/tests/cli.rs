use std::path::Path;
use std::process::{Command, Output};

fn wradon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wradon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = wradon(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn phantom_project_reconstruct_round() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    ok(&["phantom", "--grid", "48", "--out", d]);
    let field = dir.path().join("phantom");
    ok(&[
        "project",
        "--input",
        path(&field),
        "--angles",
        "64",
        "--offsets",
        "49",
        "--weight",
        "odd:amp=0.5",
        "--out",
        d,
    ]);
    let sino = dir.path().join("sinogram.json");
    let w0 = dir.path().join("w0");
    ok(&["reconstruct", "--sinogram", path(&sino), "--w0", path(&w0), "--out", d]);
    let recon = weighted_radon::harness::io::read_field(&dir.path().join("recon"))
        .unwrap()
        .0;
    let truth = weighted_radon::harness::io::read_field(&field).unwrap().0;
    let mask = weighted_radon::Mask::disk(1.02);
    assert!(weighted_radon::harness::compare(&truth, &recon, &mask).rel_l2_masked < 0.1);
    assert!(dir.path().join("recon.pgm").exists());

    ok(&[
        "reconstruct",
        "--sinogram",
        path(&sino),
        "--symmetrized",
        "--weight",
        "odd:amp=0.5",
        "--out",
        d,
    ]);
    ok(&[
        "noise",
        "--input",
        path(&sino),
        "--count-scale",
        "1000",
        "--seed",
        "4",
        "--out",
        d,
    ]);
    assert!(dir.path().join("sinogram_noisy.bin").exists());
}

#[test]
fn check_weight_reports_json() {
    let exact = ok(&[
        "check-weight",
        "--grid",
        "32",
        "--angles",
        "24",
        "--offsets",
        "33",
        "--weight",
        "odd:order=3,amp=0.3i",
    ]);
    let report: serde_json::Value = serde_json::from_str(&exact).unwrap();
    assert_eq!(report["is_exact"], true);
    let inexact = ok(&[
        "check-weight",
        "--grid",
        "32",
        "--angles",
        "24",
        "--offsets",
        "33",
        "--weight",
        "attenuated:strength=1.5",
    ]);
    let report: serde_json::Value = serde_json::from_str(&inexact).unwrap();
    assert_eq!(report["is_exact"], false);
    assert!(report["residual_rel"].as_f64().unwrap() > 0.05);
}

#[test]
fn experiment_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let csv = ok(&[
        "experiment",
        "--grid",
        "32",
        "--angles",
        "48",
        "--offsets",
        "33",
        "--ladder",
        "1,2",
        "--weight",
        "uniform",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(csv.lines().count(), 3);
    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["rungs"].as_array().unwrap().len(), 2);

    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"grid":32,"angles":48,"offsets":33,"s_max":1.2,"weight":"sym(attenuated)","ladder":[1],
            "noise":{"kind":"poisson","count_scale":1e4},"seed":3}"#,
    )
    .unwrap();
    ok(&["experiment", "--config", path(&config)]);
}

#[test]
fn rejects_bad_input() {
    for args in [
        &["check-weight", "--angles", "25"][..],
        &["check-weight", "--weight", "bogus"],
        &["check-weight", "--offsets", "128"],
        &[
            "experiment",
            "--grid",
            "32",
            "--angles",
            "48",
            "--offsets",
            "33",
            "--phantom",
            "{",
        ],
        &["reconstruct", "--sinogram", "/nonexistent/p", "--out", "/tmp"],
    ] {
        let out = wradon(args);
        assert!(!out.status.success(), "{args:?} succeeded");
        assert!(!out.stderr.is_empty());
    }
}
