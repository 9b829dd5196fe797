use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qslab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qslab"))
        .args(args)
        .current_dir(dir)
        .env_remove("QSLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap()
}

fn sphere(dir: &Path, n: usize) {
    let out = qslab(
        dir,
        &[
            "generate",
            "--variant",
            "sphere",
            "--n",
            &n.to_string(),
            "--seed",
            "7",
            "-o",
            "sphere.json",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generate_then_validate() {
    let dir = TempDir::new().unwrap();
    sphere(dir.path(), 300);
    let m = json(dir.path().join("sphere.manifest.json"));
    let text = fs::read(dir.path().join("sphere.json")).unwrap();
    let digest = sha256(&text);
    assert_eq!(m["manifest"]["space_digest"], Value::String(digest));
    assert_eq!(m["manifest"]["seeds"]["sphere-rotation"], 7);

    let out = qslab(dir.path(), &["validate", "--space", "sphere.json"]);
    assert_eq!(code(&out), 0);
    let report = json(dir.path().join("validate.json"));
    assert_eq!(report["report"]["points"], 300);
    let manifest = json(dir.path().join("validate.manifest.json"));
    assert_eq!(report["manifest_digest"], manifest["digest"]);
}

fn sha256(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

#[test]
fn chain_reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    sphere(dir.path(), 400);
    let args = [
        "chain",
        "--space",
        "sphere.json",
        "--s",
        "2",
        "--deltas",
        "0.5,0.3",
        "--pairs",
        "5",
        "--seed",
        "3",
    ];
    assert_eq!(code(&qslab(dir.path(), &args)), 0);
    let first_json = fs::read(dir.path().join("chain.json")).unwrap();
    let first_csv = fs::read_to_string(dir.path().join("chain.csv")).unwrap();
    assert_eq!(code(&qslab(dir.path(), &args)), 0);
    assert_eq!(first_json, fs::read(dir.path().join("chain.json")).unwrap());
    assert_eq!(
        first_csv,
        fs::read_to_string(dir.path().join("chain.csv")).unwrap()
    );

    let digest = json(dir.path().join("chain.manifest.json"))["digest"]
        .as_str()
        .unwrap()
        .to_string();
    let mut lines = first_csv.lines();
    assert_eq!(lines.next().unwrap(), "pair,x,y,d,delta,q,manifest_digest");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.ends_with(&digest)));

    // a different seed is a different run
    let mut other = args.to_vec();
    other[10] = "4";
    assert_eq!(code(&qslab(dir.path(), &other)), 0);
    assert_ne!(
        json(dir.path().join("chain.manifest.json"))["digest"],
        Value::String(digest)
    );
}

#[test]
fn unknown_flag_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let out = qslab(
        dir.path(),
        &["chain", "--space", "x.json", "--deltas", "0.1", "--bogus"],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&qslab(dir.path(), &["frobnicate"])), 1);
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        code(&qslab(dir.path(), &["validate", "--space", "missing.json"])),
        1
    );
    fs::write(
        dir.path().join("bad.json"),
        r#"{"metric":{"variant":"explicit_matrix","matrix":[1.0,5.0,1.0]},"points":[],"weights":[1,1,1]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&qslab(dir.path(), &["validate", "--space", "bad.json"])),
        1
    );
    sphere(dir.path(), 200);
    let out = qslab(dir.path(), &["probe-rug", "--space", "sphere.json"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn thread_cap_is_honoured_and_checked() {
    let dir = TempDir::new().unwrap();
    sphere(dir.path(), 200);
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_qslab"))
            .args(["validate", "--space", "sphere.json"])
            .current_dir(dir.path())
            .env("QSLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1")), 0);
    assert_eq!(code(&run("0")), 1);
}

#[test]
fn truncated_probe_exits_two_with_report() {
    let dir = TempDir::new().unwrap();
    sphere(dir.path(), 300);
    let out = qslab(
        dir.path(),
        &[
            "probe-dimension",
            "--space",
            "sphere.json",
            "--s",
            "1.5",
            "--halvings",
            "4",
            "--delta0",
            "0.05",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
    let report = json(dir.path().join("probe-dimension.json"));
    assert_eq!(report["report"]["truncated"], true);
}

#[test]
fn ring_and_connector_commands() {
    let dir = TempDir::new().unwrap();
    sphere(dir.path(), 600);
    let out = qslab(
        dir.path(),
        &[
            "ring",
            "--space",
            "sphere.json",
            "--center",
            "5",
            "--r",
            "0.2",
            "--delta",
            "0.2",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let ring = json(dir.path().join("ring.json"));
    assert_eq!(ring["report"]["ring"]["certificate"]["verified"], true);
    let csv = fs::read_to_string(dir.path().join("ring.csv")).unwrap();
    assert!(csv.starts_with("level,weight,chosen,manifest_digest"));

    // within δ: a single edge
    let out = qslab(
        dir.path(),
        &[
            "connect",
            "--space",
            "sphere.json",
            "--x",
            "0",
            "--y",
            "0",
            "--delta",
            "0.2",
        ],
    );
    assert_eq!(code(&out), 0);
    assert_eq!(
        json(dir.path().join("connect.json"))["report"]["trace"]["chain"],
        serde_json::json!([0])
    );

    // a cover that cannot be calibrated is a computation failure
    let out = qslab(
        dir.path(),
        &[
            "connect",
            "--space",
            "sphere.json",
            "--x",
            "0",
            "--y",
            "300",
            "--delta",
            "0.2",
            "--l",
            "5000",
        ],
    );
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn rug_probe_and_estimators() {
    let dir = TempDir::new().unwrap();
    let out = qslab(
        dir.path(),
        &[
            "generate",
            "--variant",
            "rug",
            "--nx",
            "20",
            "--ny",
            "20",
            "--dimension",
            "3",
            "-o",
            "rug.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let out = qslab(
        dir.path(),
        &["probe-rug", "--space", "rug.json", "--scales", "0.1,0.3"],
    );
    assert_eq!(code(&out), 0);
    let rows = &json(dir.path().join("probe-rug.json"))["report"]["rows"];
    let d = rows[0]["distortion"].as_f64().unwrap();
    assert!((d - 10.0).abs() < 1e-9, "{d}");

    sphere(dir.path(), 400);
    let out = qslab(
        dir.path(),
        &[
            "qs-profile",
            "--space",
            "sphere.json",
            "--delta",
            "0.3",
            "--triples",
            "20",
            "--samples",
            "40",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let q = json(dir.path().join("qs-profile.json"));
    assert_eq!(q["report"]["alpha_source"], "growth_fit");
    let m = json(dir.path().join("qs-profile.manifest.json"));
    assert_eq!(m["manifest"]["seeds"]["doubling"], 0);

    let out = qslab(
        dir.path(),
        &[
            "constants",
            "--space",
            "sphere.json",
            "--delta",
            "0.3",
            "--samples",
            "40",
            "--pairs",
            "5",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let c = json(dir.path().join("constants.json"));
    assert!(c["report"]["c_d"].as_f64().unwrap() >= 1.0);
}
