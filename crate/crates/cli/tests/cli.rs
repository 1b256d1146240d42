use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_resha");

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/examples")
}

fn qiasp() -> PathBuf {
    examples().join("qiasp.resha")
}

fn resha(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RESHA_NO_COLOR", "1").output().expect("run resha")
}

fn ok(args: &[&str]) -> String {
    let out = resha(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    ok(&["pipeline", p(&qiasp()), "--out-dir", p(&out)]);
    for name in ["ft.json", "cutsets.csv", "ccf.csv", "traceability.csv", "summary.md", "summary.txt"] {
        let body = read(&out.join(name));
        assert!(!body.is_empty(), "{name} is empty");
    }
    let summary = read(&out.join("summary.txt"));
    assert!(summary.contains("Type 4 sCCF: 28"));
    assert!(summary.contains("Type 2 sCCF: 15"));
    assert!(summary.contains("First-order software cut sets: 43"));
}

#[test]
fn malformed_model_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.resha");
    std::fs::write(&bad, "system \"x\"\ncomponent ?\n").unwrap();
    for cmd in ["validate", "pipeline", "stpa"] {
        let out = resha(&[cmd, p(&bad)]);
        assert_eq!(out.status.code(), Some(2), "{cmd}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains("bad.resha:2:11"), "{cmd}: {err}");
        assert!(!err.contains('\x1b'), "color leaked with RESHA_NO_COLOR");
    }
}

#[test]
fn invalid_model_exits_1_and_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("dangling.resha");
    let text = read(&qiasp()).replacen("inputs: HJTC_SENSOR_A", "inputs: NO_SUCH_COMPONENT", 1);
    assert_ne!(text, read(&qiasp()), "fixture edit did not apply");
    std::fs::write(&bad, text).unwrap();
    for cmd in ["validate", "pipeline"] {
        let out = resha(&[cmd, p(&bad)]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("NO_SUCH_COMPONENT"), "{cmd}");
    }
}

#[test]
fn first_order_cut_sets_of_the_reference_model() {
    let out = resha(&["cutsets", p(&qiasp()), "--max-order", "1"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert!(rows.iter().all(|r| r.starts_with("1,")));
    let software = rows.iter().filter(|r| r.ends_with(",ccf") || r.contains(",sw_")).count();
    assert_eq!(software, 43);
    assert_eq!(rows.len(), 44);
    assert!(String::from_utf8_lossy(&out.stderr).contains("43 software, 1 hardware"));
}

#[test]
fn golden_check_passes_for_the_bundled_record() {
    let out = ok(&["golden", p(&qiasp()), p(&examples().join("qiasp.golden.json"))]);
    assert!(out.starts_with("golden: PASS"), "{out}");
}

#[test]
fn chained_stages_match_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let model = qiasp();
    let m = p(&model);
    ok(&["pipeline", m, "--out-dir", p(&d.join("full"))]);

    std::fs::write(d.join("instances.json"), ok(&["stpa", m])).unwrap();
    let trace = ok(&["stpa", m, "--format", "csv"]);
    std::fs::write(d.join("hw.json"), ok(&["synth", m])).unwrap();
    let integrated = ok(&["integrate", m, "--ft", p(&d.join("hw.json")), "--instances", p(&d.join("instances.json"))]);
    std::fs::write(d.join("int.json"), integrated).unwrap();
    ok(&[
        "ccf",
        m,
        "--ft",
        p(&d.join("int.json")),
        "--instances",
        p(&d.join("instances.json")),
        "--out-dir",
        p(&d.join("ccf")),
    ]);
    let cutsets = ok(&["cutsets", "--ft", p(&d.join("ccf/ft.json"))]);

    let full = d.join("full");
    assert_eq!(trace, read(&full.join("traceability.csv")));
    assert_eq!(read(&d.join("ccf/ccf.csv")), read(&full.join("ccf.csv")));
    assert_eq!(read(&d.join("ccf/ft.json")), read(&full.join("ft.json")));
    assert_eq!(cutsets, read(&full.join("cutsets.csv")));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["pipeline", p(&qiasp()), "--out-dir", p(&a)]);
    ok(&["pipeline", p(&qiasp()), "--out-dir", p(&b)]);
    for name in ["ft.json", "cutsets.csv", "ccf.csv", "traceability.csv", "summary.md", "summary.txt"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn report_formats() {
    let md = ok(&["report", p(&qiasp())]);
    assert!(md.starts_with("# RESHA summary: QIAS-P"));
    let json = ok(&["report", p(&qiasp()), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["cause_map"].as_array().unwrap().len(), 7);
}
