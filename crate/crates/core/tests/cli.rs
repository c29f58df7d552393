use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn daseinkit(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_daseinkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn status<'a>(r: &'a Value, name: &str) -> &'a str {
    r["results"][name]["status"].as_str().unwrap()
}

const QUBIT: &str = r#"{"system":{"dim":2,"operators":{"Z":{"re":[[1,0],[0,-1]]},"X":{"re":[[0,1],[1,0]]}}}}"#;

#[test]
fn verify_oscillator_passes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "c.json", r#"{"system":{"builtin":"oscillator","N":3}}"#);
    let (code, err) = daseinkit(&["verify", "--config", "c.json", "--out", "out"], dir.path());
    assert_eq!(code, 0, "{err}");
    let r = report(&dir.path().join("out"));
    for name in [
        "lemma1",
        "lemma1_3",
        "lemma2",
        "lemma3",
        "heyting",
        "non_multiplicativity",
    ] {
        assert_eq!(status(&r, name), "PASS", "{name}");
    }
    assert_eq!(r["config"]["tolerances"]["zero"], 1e-9);
    assert_eq!(r["config"]["delta0_rule"], "joint_atom");
}

#[test]
fn contexts_are_cached_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.json", QUBIT);
    let args = ["contexts", "--config", "q.json", "--out", "out"];
    let (code, err) = daseinkit(&args, dir.path());
    assert_eq!(code, 0);
    assert!(!err.contains("reused"));
    let first = std::fs::read(dir.path().join("out/contexts.json")).unwrap();
    let (code, err) = daseinkit(&args, dir.path());
    assert_eq!(code, 0);
    assert!(err.contains("reused"));
    assert_eq!(std::fs::read(dir.path().join("out/contexts.json")).unwrap(), first);
}

#[test]
fn spectra_only_counterexample_fails_with_stage() {
    // both spectra contain zero but the zero eigenvectors are orthogonal
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"system":{"dim":2,"operators":{"P":{"re":[[0,0],[0,1]]},"X":{"re":[[1,0],[0,0]]}}}}"#,
    );
    let (code, _) = daseinkit(
        &["verify", "--config", "c.json", "--out", "so", "--rule", "spectra_only"],
        dir.path(),
    );
    assert_eq!(code, 2);
    let r = report(&dir.path().join("so"));
    assert_eq!(status(&r, "lemma3"), "FAIL");
    let violations = r["results"]["lemma3"]["witnesses"]["violations"].as_array().unwrap();
    assert_eq!(violations.len(), 1);
    let stage = violations[0].as_str().unwrap();
    assert!(stage.starts_with("V2-"));
    assert_eq!(r["results"]["lemma3"]["witnesses"]["rule_disagreements"][0], stage);

    let (code, _) = daseinkit(
        &["verify", "--config", "c.json", "--out", "ja", "--rule", "joint_atom"],
        dir.path(),
    );
    assert_eq!(code, 0);
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "bad.json",
        r#"{"system":{"dim":2,"operators":{"A":{"re":[[0,1],[0,0]]}}}}"#,
    );
    let (code, err) = daseinkit(&["verify", "--config", "bad.json", "--out", "o"], dir.path());
    assert_eq!(code, 1);
    assert!(err.contains("/system/operators/A"), "{err}");

    write(dir.path(), "broken.json", "{");
    assert_eq!(
        daseinkit(&["verify", "--config", "broken.json", "--out", "o"], dir.path()).0,
        1
    );
    assert_eq!(
        daseinkit(&["verify", "--config", "missing.json", "--out", "o"], dir.path()).0,
        1
    );
    assert_eq!(
        daseinkit(
            &["verify", "--config", "bad.json", "--out", "o", "--rule", "x"],
            dir.path()
        )
        .0,
        1
    );

    write(dir.path(), "q.json", QUBIT);
    let out = Command::new(env!("CARGO_BIN_EXE_daseinkit"))
        .args(["contexts", "--config", "q.json", "--out", "o"])
        .env("DASEINKIT_THREADS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn daseinise_writes_one_row_per_atom() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "q.json", QUBIT);
    let (code, _) = daseinkit(&["daseinise", "--config", "q.json", "--out", "o"], dir.path());
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("o/daseinisation.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("context_id,operator,atom_index,rank,outer,inner"));
    // two operators over V_Z, V_X (two atoms each) and the trivial stage
    assert_eq!(lines.count(), 2 * (2 + 2 + 1));
    assert!(text.contains("V1-"));
}

#[test]
fn user_categories_enter_the_twogroup_entry() {
    let dir = tempfile::tempdir().unwrap();
    let config = QUBIT.strip_suffix('}').unwrap().to_string()
        + r#","twogroup":{"categories":{"iso":{"objects":["a","b"],
            "homs":[{"name":"f","src":"a","dst":"b"},{"name":"g","src":"b","dst":"a"}],
            "composition":[["g","f","id_a"],["f","g","id_b"]]}}}}"#;
    write(dir.path(), "c.json", &config);
    let (code, err) = daseinkit(&["twogroup", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(code, 0, "{err}");
    let r = report(&dir.path().join("o"));
    let rows = r["results"]["twogroup"]["per_stage"].as_array().unwrap();
    let iso = rows.iter().find(|row| row["category"] == "user_iso").unwrap();
    assert_eq!(iso["report"]["status"], "PASS");
    assert_eq!(iso["report"]["autoequivalences"], 2);
    assert!(r["results"]["twogroup"]["witnesses"]["S3"].is_object());
}
