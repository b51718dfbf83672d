use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_matto-lab"));
    c.env_remove("MATTO_LAB_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&o.stdout)
        )
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(path: &Path, v: &Value) {
    std::fs::write(path, serde_json::to_string(v).unwrap()).unwrap();
}

/// Builds `A_Φ : K_{θa} → K_{θb}` for the fixture symbol `phi`.
fn matto_op(dir: &TempDir, symbol: &str, t1: &str, t2: &str) -> PathBuf {
    let out = dir.path().join(format!("op_{symbol}"));
    let o = run(&[
        "ops",
        "matto",
        "--theta1",
        p(&data(t1)),
        "--theta2",
        p(&data(t2)),
        "--symbol",
        p(&data(symbol)),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn membership(cmd: &str, t1: &str, t2: &str, op: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "--json",
        "characterize",
        cmd,
        "--theta1",
        t1,
        "--theta2",
        t2,
        "--op",
        p(op),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn entry(m: &Value, i: usize, j: usize) -> (f64, f64) {
    let z = &m[i][j];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

fn perturb(op: &Path, eps: f64, out: &Path) {
    let mut v = read(op);
    let (re, im) = entry(&v["mat"], 0, 0);
    v["mat"][0][0] = serde_json::json!([re + eps, im]);
    write(out, &v);
}

#[test]
fn modelspace_build_reports_dimension() {
    let o = run(&[
        "--json",
        "modelspace",
        "build",
        "--theta",
        p(&data("theta_a.json")),
    ]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    // degree 4: two rank-one factors and one full factor
    assert_eq!(v["dim"], 4);
    assert_eq!(v["d"], 2);
    assert!(v["gram_residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["basis_fourier"].as_array().unwrap().len(), 4);
}

#[test]
fn recover_round_trips_a_matto() {
    let dir = TempDir::new().unwrap();
    let op = matto_op(&dir, "phi.json", "theta_a.json", "theta_b.json");
    let report = dir.path().join("report.json");
    let o = membership(
        "recover",
        p(&data("theta_a.json")),
        p(&data("theta_b.json")),
        &op,
        &["--report", p(&report)],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["is_member"], true);
    assert!(v["roundtrip_error"].as_f64().unwrap() <= 1e-8);
    assert!(v["symbol"]["psi"]["band"].is_array());
    assert_eq!(read(&report), v);
}

#[test]
fn shift_and_zero_are_members() {
    let dir = TempDir::new().unwrap();
    let th = p(&data("theta_a.json")).to_string();
    let s = matto_op(&dir, "shift.json", "theta_a.json", "theta_a.json");
    let o = membership("recover", &th, &th, &s, &[]);
    assert_eq!(code(&o), 0);
    assert!(json(&o)["roundtrip_error"].as_f64().unwrap() <= 1e-8);

    let mut zero = read(&s);
    let n = zero["dim_out"].as_u64().unwrap() as usize;
    let m = zero["dim_in"].as_u64().unwrap() as usize;
    zero["mat"] = serde_json::json!(vec![vec![[0.0, 0.0]; m]; n]);
    let z = dir.path().join("zero.json");
    write(&z, &zero);
    let o = membership("recover", &th, &th, &z, &[]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["is_member"], true);
    for part in ["psi", "xi"] {
        for (_, c) in v["symbol"][part]["coeffs"].as_object().unwrap() {
            for row in c.as_array().unwrap() {
                for z in row.as_array().unwrap() {
                    assert!(z[0].as_f64().unwrap().abs() < 1e-12);
                    assert!(z[1].as_f64().unwrap().abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn perturbed_operator_is_rejected_with_witness() {
    let dir = TempDir::new().unwrap();
    let op = matto_op(&dir, "phi.json", "theta_a.json", "theta_b.json");
    let bad = dir.path().join("bad_op.json");
    perturb(&op, 0.01, &bad);
    let o = membership(
        "is-matto",
        p(&data("theta_a.json")),
        p(&data("theta_b.json")),
        &bad,
        &[],
    );
    assert_eq!(code(&o), 3);
    let v = json(&o);
    assert_eq!(v["is_member"], false);
    let w = &v["witness"];
    assert!(w["value"].as_f64().unwrap() > 0.0);
    assert!(!w["u"].as_array().unwrap().is_empty());

    let o = bin()
        .args(["characterize", "is-matto", "--theta1"])
        .arg(data("theta_a.json"))
        .arg("--theta2")
        .arg(data("theta_b.json"))
        .arg("--op")
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("member: no"));
    assert!(text.contains("u = ["));
}

#[test]
fn tiny_perturbation_is_inconsistent() {
    let dir = TempDir::new().unwrap();
    let op = matto_op(&dir, "phi.json", "theta_a.json", "theta_b.json");
    let bad = dir.path().join("bad_op.json");
    perturb(&op, 1e-6, &bad);
    let o = membership(
        "is-matto",
        p(&data("theta_a.json")),
        p(&data("theta_b.json")),
        &bad,
        &[],
    );
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["error"], "inconsistent");
}

#[test]
fn tilde_flavor_accepts_members() {
    let dir = TempDir::new().unwrap();
    let op = matto_op(&dir, "phi.json", "theta_a.json", "theta_b.json");
    let o = membership(
        "is-matto",
        p(&data("theta_a.json")),
        p(&data("theta_b.json")),
        &op,
        &["--flavor", "tilde"],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["flavor"], "tilde");
}

#[test]
fn tau_transfers_membership() {
    let dir = TempDir::new().unwrap();
    let op = matto_op(&dir, "phi.json", "theta_a.json", "theta_b.json");
    let moved = dir.path().join("moved.json");
    let t1 = dir.path().join("t1.json");
    let t2 = dir.path().join("t2.json");
    let o = run(&[
        "--json",
        "ops",
        "tau",
        "--theta1",
        p(&data("theta_a.json")),
        "--theta2",
        p(&data("theta_b.json")),
        "--op",
        p(&op),
        "--out",
        p(&moved),
        "--tilde1-out",
        p(&t1),
        "--tilde2-out",
        p(&t2),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["unitary_deviation"].as_f64().unwrap() < 1e-10);
    assert_eq!(read(&moved), v["operator"]);
    let o = membership("is-matto", p(&t1), p(&t2), &moved, &[]);
    assert_eq!(code(&o), 0);
}

#[test]
fn crofoot_reports_symbol_law() {
    let o = run(&[
        "--json",
        "ops",
        "crofoot",
        "--theta1",
        p(&data("theta_a.json")),
        "--w1",
        p(&data("w.json")),
        "--theta2",
        p(&data("theta_b.json")),
        "--w2",
        p(&data("w.json")),
        "--symbol",
        p(&data("phi.json")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert!(v["unitary_deviation"].as_f64().unwrap() < 1e-8);
    assert_eq!(v["theta_w_pure"], true);
    assert!(v["symbol_law_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn parse_errors_carry_path_and_offset() {
    let o = run(&[
        "--json",
        "modelspace",
        "build",
        "--theta",
        p(&data("bad.json")),
    ]);
    assert_eq!(code(&o), 5);
    let v = json(&o);
    assert_eq!(v["error"], "parse");
    assert_eq!(v["exit_code"], 5);
    assert_eq!(v["path"], "U0[1][1][1]");
    let text = std::fs::read_to_string(data("bad.json")).unwrap();
    let offset = v["offset"].as_u64().unwrap() as usize;
    let token = text.find("\"x\"").unwrap();
    assert!((token..token + 3).contains(&offset));
}

#[test]
fn io_usage_and_numerical_exit_codes() {
    let o = run(&["modelspace", "build", "--theta", "/nonexistent/theta.json"]);
    assert_eq!(code(&o), 6);
    let o = run(&["modelspace", "build"]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify", "--max-d", "5"]);
    assert_eq!(code(&o), 2);
    // an unattainable identity tolerance makes the suite fail
    let o = run(&[
        "--tol-id",
        "1e-300",
        "verify",
        "--max-d",
        "1",
        "--max-degree",
        "2",
    ]);
    assert_eq!(code(&o), 1);
    let o = run(&["--help"]);
    assert_eq!(code(&o), 0);

    let dir = TempDir::new().unwrap();
    let mut th = read(&data("theta_a.json"));
    th["U0"] = serde_json::json!([[[2, 0], [0, 0]], [[0, 0], [1, 0]]]);
    let path = dir.path().join("nonunitary.json");
    write(&path, &th);
    let o = run(&["modelspace", "build", "--theta", p(&path)]);
    assert_eq!(code(&o), 7);
}

#[test]
fn manifest_lists_digests() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("space.json");
    let man = dir.path().join("manifest.json");
    let o = run(&[
        "--seed",
        "11",
        "--manifest",
        p(&man),
        "modelspace",
        "build",
        "--theta",
        p(&data("theta_a.json")),
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 0);
    let m = read(&man);
    assert_eq!(m["rng_seed"], 11);
    assert_eq!(m["command"], "build");
    let digest = |path: &Path| {
        use sha2::{Digest, Sha256};
        let bytes = std::fs::read(path).unwrap();
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>()
    };
    assert_eq!(m["emitted"][0]["sha256"], digest(&out));
    assert_eq!(m["inputs"][0]["sha256"], digest(&data("theta_a.json")));
    assert_eq!(m["cfg"]["d"], 2);
    assert!(m["cfg"]["q"].is_number());
}

fn strip_timestamp(v: &mut Value) {
    v.as_object_mut().unwrap().remove("timestamp");
}

#[test]
fn verify_is_deterministic_and_honours_env_seed() {
    let small = [
        "--json",
        "--seed",
        "3",
        "verify",
        "--max-d",
        "1",
        "--max-degree",
        "2",
    ];
    let a = run(&small);
    let b = run(&small);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stdout));
    let (mut va, mut vb) = (json(&a), json(&b));
    assert_eq!(va["seed"], 3);
    strip_timestamp(&mut va);
    strip_timestamp(&mut vb);
    assert_eq!(va, vb);

    let c = bin()
        .args(small)
        .env("MATTO_LAB_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(code(&c), 0);
    assert_eq!(json(&c)["seed"], 9);
}
