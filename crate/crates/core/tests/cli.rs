use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locfaults"))
}

fn corpus(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(file)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("locfaults-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_with_json_counterexample() {
    let src = corpus("AbsMinusKO.imp");
    let ce = corpus("AbsMinusKO.ce.json");
    let o = run(&["run", "--source", src.to_str().unwrap(), "--ce", ce.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["entries"][0]["deviations"], serde_json::json!([]));
    assert_eq!(v["entries"][0]["mcs"], serde_json::json!([[17]]));
    assert!(v["timings"]["localize_ms"].is_number());
}

#[test]
fn run_with_inline_counterexample_as_text() {
    let src = corpus("MinmaxKO.imp");
    let o = run(&[
        "run",
        "--source",
        src.to_str().unwrap(),
        "--ce",
        "in1=2,in2=1,in3=3",
        "--kmax",
        "0",
        "--format",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("path") && l.contains("{10} {19}")), "{text}");
}

#[test]
fn passing_input_is_rejected() {
    let src = corpus("AbsMinusKO.imp");
    let o = run(&["run", "--source", src.to_str().unwrap(), "--ce", "i=2,j=1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn precondition_violation_and_parse_errors() {
    let dir = scratch("errors");
    let good = dir.join("p.imp");
    fs::write(&good, "prog P(int x) {\n  pre x > 0;\n  int y = x;\n  post y == 0;\n}\n").unwrap();
    let o = run(&["run", "--source", good.to_str().unwrap(), "--ce", "x=-1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["run", "--source", good.to_str().unwrap(), "--ce", "x=1", "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("{3}"));

    let bad = dir.join("bad.imp");
    fs::write(&bad, "prog P(int x) {\n  pre true;\n  x = x * x;\n  post true;\n}\n").unwrap();
    let o = run(&["run", "--source", bad.to_str().unwrap(), "--ce", "x=1"]);
    assert_eq!(o.status.code(), Some(3));

    let o = run(&["run", "--source", good.to_str().unwrap(), "--ce", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["run", "--source", good.to_str().unwrap(), "--ce", "x=1", "--unroll", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn bench_checks_fixtures() {
    let o = run(&["bench", "--filter", "AbsMinus"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("AbsMinus")).count(), 12);
}

#[test]
fn bench_is_deterministic_and_detects_mismatches() {
    let a = scratch("bench-a");
    let b = scratch("bench-b");
    for dir in [&a, &b] {
        let o = run(&["bench", "--filter", "Tritype", "--fixtures", dir.to_str().unwrap(), "--update"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
    }
    let victim = a.join("TritypeKO.json");
    let text = fs::read_to_string(&victim).unwrap().replacen("54", "55", 1);
    fs::write(&victim, text).unwrap();
    let o = run(&["bench", "--filter", "TritypeKO", "--fixtures", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("TritypeKO"));
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
}
