use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use orabe::codec::Artifact;
use orabe::group::GroupElement;
use orabe::orabe::InstanceTransform;
use orabe::{MockGroup, PairingGroup};

fn orabe(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orabe"))
        .args(args)
        .env("ORABE_OUT_DIR", dir)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = orabe(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// setup, two registrations, encrypt, transform, decrypt.
fn happy_pipeline(dir: &Path, backend: &str) {
    fs::write(dir.join("u.txt"), "doctor nurse admin\n").unwrap();
    fs::write(dir.join("msg.txt"), b"ward 7 rota").unwrap();
    ok(dir, &["setup", "--l", "1", "--universe", "u.txt", "--backend", backend, "--seed", "1"]);
    for (name, attrs, seed) in [("alice", "doctor,admin", "2"), ("bob", "nurse", "3")] {
        ok(dir, &["keygen", "--crs", "crs.json", "--aux", "aux.json", "--name", name, "--seed", seed]);
        let pk = format!("{name}.pk.json");
        ok(dir, &["register", "--crs", "crs.json", "--aux", "aux.json", "--pk", &pk, "--attrs", attrs]);
    }
    ok(dir, &["encrypt", "--mpk", "mpk.json", "--policy", "doctor and admin", "--input", "msg.txt", "--seed", "4"]);
    ok(dir, &["transform", "--aux", "aux.json", "--pk", "alice.pk.json", "--ct", "ct.json"]);
    ok(dir, &["decrypt", "--sk", "alice.sk.json", "--transformed", "transformed.json", "--ct", "ct.json"]);
}

#[test]
fn mock_roundtrip_recovers_input() {
    let dir = tempfile::tempdir().unwrap();
    happy_pipeline(dir.path(), "mock");
    assert_eq!(fs::read(dir.path().join("decrypted.bin")).unwrap(), b"ward 7 rota");
}

#[test]
fn real_backend_roundtrip_recovers_input() {
    let dir = tempfile::tempdir().unwrap();
    happy_pipeline(dir.path(), "bls12-381");
    assert_eq!(fs::read(dir.path().join("decrypted.bin")).unwrap(), b"ward 7 rota");
}

#[test]
fn unauthorized_transform_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    happy_pipeline(d, "mock");
    let out = orabe(d, &["transform", "--aux", "aux.json", "--pk", "bob.pk.json", "--ct", "ct.json", "-o", "bob.t.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('⊥'));
}

#[test]
fn tampered_transform_exits_one_and_fraud_is_proven() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    happy_pipeline(d, "mock");

    let text = fs::read_to_string(d.join("transformed.json")).unwrap();
    let env = orabe::codec::Envelope::from_json(&text).unwrap();
    let mut t = InstanceTransform::<MockGroup>::from_envelope(&env).unwrap();
    t.result.masked = t.result.masked.op(&<MockGroup as PairingGroup>::Target::generator());
    fs::write(d.join("bad.json"), t.to_envelope().to_json()).unwrap();

    let out = orabe(d, &["decrypt", "--sk", "alice.sk.json", "--transformed", "bad.json", "--ct", "ct.json", "-o", "x.bin"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('⊥'));
    assert!(!d.join("x.bin").exists());

    ok(d, &["fraud-prove", "--sk", "alice.sk.json", "--pk", "alice.pk.json", "--transformed", "bad.json", "--seed", "9"]);
    let out = ok(d, &["fraud-verify", "--proof", "proof.json", "--pk", "alice.pk.json", "--transformed", "bad.json", "--ct", "ct.json"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "verdict 1");

    ok(d, &["fraud-prove", "--sk", "alice.sk.json", "--pk", "alice.pk.json", "--transformed", "transformed.json", "-o", "honest.json"]);
    let out = ok(d, &["fraud-verify", "--proof", "honest.json", "--pk", "alice.pk.json", "--transformed", "transformed.json", "--ct", "ct.json"]);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "verdict 0");
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    happy_pipeline(d, "mock");
    fs::write(d.join("junk.json"), "{not json").unwrap();
    let out = orabe(d, &["decrypt", "--sk", "alice.sk.json", "--transformed", "junk.json", "--ct", "ct.json"]);
    assert_eq!(out.status.code(), Some(2));
    // A key in place of a ciphertext.
    let out = orabe(d, &["decrypt", "--sk", "alice.sk.json", "--transformed", "transformed.json", "--ct", "mpk.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = orabe(d, &["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn seeded_reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    happy_pipeline(a.path(), "mock");
    happy_pipeline(b.path(), "mock");
    for f in ["crs.json", "aux.json", "mpk.json", "alice.sk.json", "ct.json", "transformed.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn simulate_reports_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("s.toml"),
        r#"
seed = 5
levels = 1
universe = ["a", "b"]
users = [{ attributes = ["a", "b"] }, { attributes = ["a"] }]
policy = "a and b"
message = "hello"
dcs_strategy = "corrupt-c2"
reward = 10
"#,
    )
    .unwrap();
    let out = ok(d, &["simulate", "--scenario", "s.toml", "--no-timings"]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["outcome"], "refunded");
    assert_eq!(report["verdict"], 1);
    let again = ok(d, &["simulate", "--scenario", "s.toml", "--no-timings"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn bench_emits_constant_decrypt_exponent_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(
        dir.path(),
        &["bench", "--attrs", "2..6", "--step", "2", "--reps", "1", "--decrypt-reps", "2", "--backend", "mock"],
    );
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "decrypt_target_exps").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[col] == "1"));
}
