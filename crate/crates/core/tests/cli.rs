//! End-to-end checks of the command-line interface: exit codes, trace file
//! behavior, and reproducibility across invocations.

use std::path::Path;
use std::process::{Command, Output};

fn actinf(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_actinf"))
        .current_dir(cwd)
        .args(args)
        .output()
        .unwrap()
}

fn data(file: &str) -> String {
    format!("{}/tests/data/{file}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn run_zero_steps_writes_empty_trace_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.jsonl");
    let model = data("three_state.json");
    let result = actinf(
        &[
            "run", "--model", &model, "--env", "three-state", "--steps", "0",
            "--out", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(result.status.success(), "{result:?}");
    assert_eq!(std::fs::read(&out).unwrap(), b"");
}

#[test]
fn run_malformed_model_exits_one_without_trace() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("broken.json");
    std::fs::write(&model, "{\"version\": 1").unwrap();
    let out = dir.path().join("trace.jsonl");
    let result = actinf(
        &[
            "run", "--model", model.to_str().unwrap(), "--env", "three-state",
            "--steps", "5", "--out", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(1));
    assert!(!out.exists(), "trace written despite parse failure");
}

#[test]
fn run_invalid_columns_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bad.json");
    // B column [1, 1] does not sum to one
    std::fs::write(
        &model,
        r#"{"version":1,"num_obs":[2],"num_states":[2],"num_controls":[1],
            "a":[[1.0,0.0,0.0,1.0]],"b":[[1.0,1.0,0.0,1.0]]}"#,
    )
    .unwrap();
    let result = actinf(
        &[
            "run", "--model", model.to_str().unwrap(), "--env", "three-state",
            "--steps", "5",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn run_repeat_invocation_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("three_state.json");
    let mut traces = Vec::new();
    for name in ["a.jsonl", "b.jsonl"] {
        let out = dir.path().join(name);
        let result = actinf(
            &[
                "run", "--model", &model, "--env", "three-state", "--steps", "20",
                "--agent-seed", "9", "--env-seed", "4", "--stochastic-actions",
                "--out", out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(result.status.success());
        traces.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn run_different_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("three_state.json");
    let mut traces = Vec::new();
    for seed in ["4", "5"] {
        let out = dir.path().join(format!("{seed}.jsonl"));
        let result = actinf(
            &[
                "run", "--model", &model, "--env", "three-state", "--steps", "20",
                "--agent-seed", "9", "--env-seed", seed, "--out", out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(result.status.success());
        traces.push(std::fs::read(&out).unwrap());
    }
    assert_ne!(traces[0], traces[1]);
}

#[test]
fn run_summary_on_stderr_trace_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("three_state.json");
    let result = actinf(
        &[
            "run", "--model", &model, "--env", "three-state", "--steps", "3",
        ],
        dir.path(),
    );
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert_eq!(stdout.lines().count(), 3);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("mean vfe"), "{stderr}");
}

#[test]
fn run_with_declarative_environment_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("epistemic_chamber.json");
    let out = dir.path().join("trace.jsonl");
    let result = actinf(
        &[
            "run", "--model", &model, "--env", &model, "--steps", "6",
            "--out", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(result.status.success(), "{result:?}");
    let trace = std::fs::read_to_string(&out).unwrap();
    assert_eq!(trace.lines().count(), 6);
}

#[test]
fn run_learning_flags_accepted() {
    let dir = tempfile::tempdir().unwrap();
    // add Dirichlet priors so learning flags have something to update
    let model = actinf::load_model(data("three_state.json")).unwrap();
    let model = model
        .with_dirichlet_a(vec![actinf::DirichletCounts::ones(vec![3, 3])])
        .with_dirichlet_b(vec![actinf::DirichletCounts::ones(vec![3, 3, 2])]);
    let path = dir.path().join("learnable.json");
    actinf::save_model(&model, &path).unwrap();
    let result = actinf(
        &[
            "run", "--model", path.to_str().unwrap(), "--env", "three-state",
            "--steps", "8", "--learn-a", "--learn-b", "--lr", "0.5",
            "--gamma", "8.0", "--alpha", "2.0", "--policy-len", "2",
            "--param-info-gain",
        ],
        dir.path(),
    );
    assert!(result.status.success(), "{result:?}");
}

#[test]
fn run_learning_without_priors_is_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("three_state.json");
    let result = actinf(
        &[
            "run", "--model", &model, "--env", "three-state", "--steps", "3",
            "--learn-a",
        ],
        dir.path(),
    );
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("step 0"), "{stderr}");
}

#[test]
fn validate_clean_file_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let model = data("three_state.json");
    let result = actinf(&["validate", "--model", &model], dir.path());
    assert!(result.status.success());
}

#[test]
fn validate_broken_column_reports_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("bad.json");
    std::fs::write(
        &model,
        r#"{"version":1,"num_obs":[2],"num_states":[2],"num_controls":[1],
            "a":[[0.9,0.0,0.0,1.0]],"b":[[1.0,0.0,0.0,1.0]]}"#,
    )
    .unwrap();
    let result = actinf(&["validate", "--model", model.to_str().unwrap()], dir.path());
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains('0'), "no column coordinates in: {stderr}");
}

#[test]
fn validate_missing_file_distinct_message() {
    let dir = tempfile::tempdir().unwrap();
    let result = actinf(&["validate", "--model", "does-not-exist.json"], dir.path());
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(
        stderr.contains("does-not-exist.json"),
        "missing-file message should name the path: {stderr}"
    );
}
