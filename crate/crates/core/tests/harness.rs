use std::path::Path;

use cyclebreak_core::harness::{run, ExperimentConfig, RunOptions, Verdict};

fn run_json(json: &str, dir: &Path, workers: usize) -> i32 {
    let options = RunOptions {
        workers,
        out_dir: Some(dir.to_path_buf()),
    };
    match ExperimentConfig::from_json(json) {
        Ok(config) => match run(&config, &options) {
            Ok(outcome) => outcome.exit_code(),
            Err(e) => e.exit_code(),
        },
        Err(e) => e.exit_code(),
    }
}

#[test]
fn malformed_configs_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    for json in [
        "{not json",
        r#"{"operation":"sample-ust","seed":1,"colour":"red"}"#,
        r#"{"operation":"sample-ust"}"#,
        r#"{"operation":"sample-ust","seed":1,"replicas":0,"source":{"kind":"corpus","name":"path-3"}}"#,
        r#"{"operation":"sample-ust","seed":1,"source":{"kind":"corpus","name":"no-such-fixture"}}"#,
        r#"{"operation":"sample-ust","seed":1,"source":{"kind":"file","path":"missing.json"}}"#,
        r#"{"operation":"gw-ends-trend","seed":1,"depths":[3],"source":{"kind":"gw","offspring":["1/2","1/3"]}}"#,
    ] {
        assert_eq!(run_json(json, tmp.path(), 1), 2, "{json}");
    }
}

#[test]
fn oversized_certify_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"operation":"certify","seed":1,"source":{"kind":"zd-box","dim":2,"side":6,"margin":1}}"#;
    assert_eq!(run_json(json, tmp.path(), 1), 3);
}

#[test]
fn certify_passes_on_the_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_json(r#"{"operation":"certify","seed":3}"#, tmp.path(), 2), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("certify.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["fixtures"].as_array().unwrap().len() >= 10);
}

#[test]
fn fixed_root_control_is_detected() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"operation":"reversibility","seed":2,"samples":200000,"root_law":"fixed-root",
                   "source":{"kind":"decorated-tree"}}"#;
    assert_eq!(run_json(json, tmp.path(), 2), 0);
}

#[test]
fn unit_tree_disagrees_with_stated_values() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"operation":"reversibility","seed":2,"samples":200000,"source":{"kind":"decorated-tree"}}"#;
    assert_eq!(run_json(json, tmp.path(), 2), Verdict::StatisticalFailed.exit_code());
}

#[test]
fn quarter_conductance_tree_matches_stated_values() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"operation":"reversibility","seed":2,"samples":200000,
                   "source":{"kind":"decorated-tree","tree_conductance":"1/4"}}"#;
    assert_eq!(run_json(json, tmp.path(), 2), 0);
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let tmp = tempfile::tempdir().unwrap();
    let json = r#"{"operation":"sample-oust","seed":9,"replicas":500,"source":{"kind":"corpus","name":"square-diagonal"}}"#;
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert_eq!(run_json(json, &a, 1), 0);
    assert_eq!(run_json(json, &b, 3), 0);
    for name in ["forests.jsonl", "states.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
}
