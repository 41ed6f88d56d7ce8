use std::path::Path;

use locfaults::bench::{run_entry, BenchConfig};
use locfaults::corpus::programs;
use locfaults::report::to_value;

fn schema() -> serde_json::Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("docs").join("report.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn corpus_reports_match_the_schema() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    for entry in programs() {
        let run = run_entry(&entry, &BenchConfig::default()).unwrap();
        for (k, report) in &run.runs {
            let v = to_value(report);
            let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
            assert!(errors.is_empty(), "{} k={k}: {errors:?}", entry.name);
        }
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let validator = jsonschema::validator_for(&schema()).unwrap();
    let bad = serde_json::json!({
        "counterexample": {"x": 1},
        "entries": [{"deviations": [0], "mcs": []}],
        "timings": {"preprocess_ms": 0.0, "localize_ms": 0.0}
    });
    assert!(!validator.is_valid(&bad));
    let missing = serde_json::json!({"counterexample": {}, "entries": []});
    assert!(!validator.is_valid(&missing));
}
