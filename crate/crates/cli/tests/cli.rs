use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(job: &str, dir: &Path, extra: &[&str]) -> Output {
    let job_path = dir.join("job.json");
    fs::write(&job_path, job).unwrap();
    Command::new(env!("CARGO_BIN_EXE_gluing"))
        .arg("--job")
        .arg(&job_path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn classify_full_shift() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(r#"{"command": "classify", "system": "full2", "seed": 7}"#, dir.path(), &["--ci"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["seed"], 7);
    let c = &r["result"]["classification"];
    assert_eq!(c["gluing_scales"][0]["m_required"], 3);
    assert_eq!(c["gluing_scales"][0]["eps"], "1/2");
    assert_eq!(c["gluing"]["answer"], "yes");
    let checks = fs::read_to_string(dir.path().join("out/tables/checks.csv")).unwrap();
    assert!(checks.starts_with("id,status,details,seed\n"));
    assert!(checks.lines().skip(1).all(|l| l.ends_with(",7")));
}

#[test]
fn dichotomy_on_a_rotation_reports_gluing_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(r#"{"command": "dichotomy", "system": "rotation_12_4", "params": {"eps": "1/8"}}"#, dir.path(), &["--ci"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(dir.path())["result"]["outcome"], "gluing_failed");
}

#[test]
fn zero_n_max_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(r#"{"command": "entropy", "system": "golden_mean", "params": {"n_max": 0}}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_json(&out);
    assert_eq!(err["field"], "params.n_max");
    assert_eq!(err["exit_code"], 1);
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn malformed_jobs_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(r#"{"command": "entropy", "system": "nope"}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["field"], "system");
    let out = run(r#"{"command": "entropy", "system": "full2", "params": {"eps": "1/0"}}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_json(&out)["field"].as_str().unwrap().starts_with("params.eps"));
    let out = run("{", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cross_check_failures_are_fatal_only_under_ci() {
    // identical points glue into identical witnesses
    let job = r#"{"command": "dichotomy", "system": "full2",
        "params": {"x": {"periodic": [0]}, "y": {"periodic": [0]}, "n": 2, "require_stay_away": false}}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = run(job, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!report(dir.path())["cross_check_failures"].as_array().unwrap().is_empty());
    let out = run(job, dir.path(), &["--ci"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "cross_check");
}

#[test]
fn unwritable_output_is_an_internal_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("out"), "a file, not a directory").unwrap();
    let out = run(r#"{"command": "periodic", "system": "golden_mean"}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "internal");
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = vec![("report.json".to_string(), fs::read(dir.join("out/report.json")).unwrap())];
    let mut tables: Vec<_> = fs::read_dir(dir.join("out/tables")).unwrap().map(|e| e.unwrap().path()).collect();
    tables.sort();
    for t in tables {
        files.push((t.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&t).unwrap()));
    }
    files
}

#[test]
fn reruns_are_byte_identical() {
    let jobs = [
        r#"{"command": "entropy", "system": "square_map_1024", "seed": 3, "params": {"eps_list": ["1/2", "1/4"], "n_max": 8}}"#,
        r#"{"command": "gluing", "system": "odometer_8", "seed": 11, "params": {"eps": "1/4", "pool": {"kind": "sample", "size": 32}}}"#,
        r#"{"command": "classify", "system": "golden_mean", "seed": 5}"#,
    ];
    for job in jobs {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        assert_eq!(run(job, a.path(), &["--threads", "1"]).status.code(), Some(0));
        assert_eq!(run(job, b.path(), &["--threads", "4"]).status.code(), Some(0));
        assert_eq!(snapshot(a.path()), snapshot(b.path()), "{job}");
    }
}

#[test]
fn every_command_writes_its_tables() {
    let cases = [
        (r#"{"command": "entropy", "system": "golden_mean", "params": {"n_max": 10}}"#, "entropy.csv"),
        (r#"{"command": "periodic", "system": "golden_mean", "params": {"n_max": 6}}"#, "periodic.csv"),
        (r#"{"command": "gluing", "system": "full2", "params": {"specification": true, "L": 4}}"#, "per_length.csv"),
        (r#"{"command": "gluing", "system": "thue_morse", "params": {"L": 8, "M_max": 4096}}"#, "per_length.csv"),
        (r#"{"command": "dichotomy", "system": "full2", "params": {"n": 3}}"#, "witnesses.csv"),
        (
            r#"{"command": "shadow", "system": "full2", "params": {"eps": "1/2", "gap": [3],
                "segments": [{"point": {"periodic": [0]}, "length": 2}, {"point": {"periodic": [1]}, "length": 2}]}}"#,
            "schedule.csv",
        ),
        (
            r#"{"command": "shadow", "system": "odometer_5", "params": {"eps": "1/4", "pool": {"kind": "all"},
                "segments": [{"point": {"grid": 0}, "length": 2}, {"point": {"grid": 1}, "length": 2}]}}"#,
            "schedule.csv",
        ),
    ];
    for (job, table) in cases {
        let dir = tempfile::tempdir().unwrap();
        let out = run(job, dir.path(), &["--ci"]);
        assert_eq!(out.status.code(), Some(0), "{job}: {}", String::from_utf8_lossy(&out.stderr));
        let csv = fs::read_to_string(dir.path().join("out/tables").join(table)).unwrap();
        assert!(csv.lines().count() >= 2, "{job}: {csv}");
    }
    let dir = tempfile::tempdir().unwrap();
    let shadow = r#"{"command": "shadow", "system": "full2", "params": {"eps": "1/2", "gap": [2],
        "segments": [{"point": {"periodic": [0]}, "length": 2}, {"point": {"periodic": [1]}, "length": 2}]}}"#;
    assert_eq!(run(shadow, dir.path(), &[]).status.code(), Some(0));
    assert_eq!(report(dir.path())["result"]["outcome"], "not_shadowed");
}

#[test]
fn systems_can_come_from_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("golden.json"),
        r#"{"kind": "sft", "label": "golden", "parameters": {"transitions": [[1, 1], [1, 0]]}}"#,
    )
    .unwrap();
    let out = run(r#"{"command": "periodic", "system": {"file": "golden.json"}, "params": {"n_max": 3}}"#, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = &report(dir.path())["result"]["rows"];
    let p: Vec<u64> = rows.as_array().unwrap().iter().map(|r| r["p_n"].as_u64().unwrap()).collect();
    assert_eq!(p, [1, 3, 6]);
}

#[test]
fn shipped_jobs_run_cleanly() {
    let jobs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../jobs");
    let mut paths: Vec<_> = fs::read_dir(&jobs).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    assert!(paths.len() >= 10);
    for path in paths {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_gluing"))
            .arg("--job")
            .arg(&path)
            .arg("--out")
            .arg(dir.path())
            .arg("--ci")
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), String::from_utf8_lossy(&out.stderr));
    }
}
