use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bcoh(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcoh")).current_dir(dir).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

const CONFIG: &str = r#"{"schema_version":1,"cochain":{"kind":"brooks2","pattern":"ab"},"words":["ab"],
"epsilon_ladder":[0.3,0.1],"integrator":{"mode":"regions","mc_samples":2000,"seed":3,"tolerance":1e-6}}"#;

#[test]
fn converge_writes_a_commented_table() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "cfg.json", CONFIG);
    let out = bcoh(dir.path(), &["converge", "--config", "cfg.json", "--csv", "rows.csv", "--report", "report.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# schema_version=1"));
    assert!(lines[1].starts_with('#'));
    assert!(lines[2].starts_with("word,epsilon,"));
    assert_eq!(lines.len(), 5);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["results"].as_array().unwrap().len(), 2);
}

#[test]
fn gamma_and_regions_print_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = bcoh(dir.path(), &["gamma", "--element", "ab", "--point", "0.02,1.03"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["word"], "ab");
    assert_eq!(v["region"], "core_both");

    write(dir.path(), "batch.csv", "element,x,y\nab,0.02,1.03\ne,3.0,3.0\n");
    let out = bcoh(dir.path(), &["gamma", "--batch", "batch.csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().filter(|l| !l.starts_with('#')).count(), 3);

    let out = bcoh(dir.path(), &["regions", "--epsilon", "0.4,0.2"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().filter(|l| !l.starts_with('#')).count(), 11);
}

#[test]
fn exit_codes_name_the_failure() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "qm.json", r#"{"kind":"brooks2","pattern":"ab"}"#);

    let out = bcoh(dir.path(), &["induce", "--cochain", "qm.json", "--tuple", "ab,b,e", "--mode", "mc", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(2), "mc mode without a seed");

    write(dir.path(), "bad.json", &CONFIG.replace("[0.3,0.1]", "[0.1,0.3]"));
    assert_eq!(bcoh(dir.path(), &["converge", "--config", "bad.json"]).status.code(), Some(2));

    write(dir.path(), "far.json", r#"{"R":6.0,"c_alpha":[-3.0,0.0],"c_beta":[3.0,0.0],"r_alpha":1.0,"r_beta":1.0,"w_alpha":0.25,"w_beta":0.25,"epsilon":0.1}"#);
    assert_eq!(bcoh(dir.path(), &["--geometry", "far.json", "regions"]).status.code(), Some(3));

    let out = bcoh(dir.path(), &["induce", "--cochain", "qm.json", "--tuple", "ab,b", "--samples", "100"]);
    assert_eq!(out.status.code(), Some(4), "arity mismatch");

    let out = bcoh(dir.path(), &["induce", "--cochain", "qm.json", "--tuple", "ab,b,e", "--mode", "mc", "--samples", "2000", "--seed", "9"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["value", "stat_error", "collar_bound", "region_breakdown"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}
