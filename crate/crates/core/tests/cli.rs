use octahedron::cli::{run, RunConfig, EXIT_OK, EXIT_TOO_LARGE, EXIT_USAGE};
use octahedron::verify::{COVERAGE, SUITES};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("octahedron").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn polynomial_of(line: &str) -> &str {
    line.split(" = ").nth(1).unwrap()
}

#[test]
fn flat_minor_and_oracle_print_the_same_text() {
    let (code, minor, _) = call(&["solve", "--query", "3,0,3", "--method", "flat-minor"]);
    assert_eq!(code, EXIT_OK);
    let (code, oracle, _) = call(&["oracle", "--query", "3,0,3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(polynomial_of(minor.trim()), polynomial_of(oracle.trim()));
    assert_eq!(polynomial_of(minor.trim()).matches(" +").count() + 1, 8);
}

#[test]
fn all_methods_agree_on_an_ar_query() {
    let (code, out, _) = call(&["solve", "--r", "3", "--query", "2,1,3", "--query", "1,0,-3"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(!out.contains("disagree"));
    assert!(out.lines().count() >= 6);
}

#[test]
fn forward_then_backward_mutation_restores_the_input() {
    let base = ["mutate", "--r", "2", "--window", "1,2,-3,3"];
    let (_, plain, _) = call(&base);
    let mut args = base.to_vec();
    args.extend(["--mutation", "1,1,forward", "--mutation", "1,1,backward"]);
    let (code, round, _) = call(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(plain, round);
}

#[test]
fn mutating_a_maximum_forward_is_a_usage_error() {
    let (code, _, err) = call(&["mutate", "--r", "2", "--window", "1,2,-3,3", "--mutation", "1,0,forward"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("not mutable"));
}

#[test]
fn decompose_prints_word_and_matrix() {
    let (code, out, _) = call(&["decompose", "--r", "2", "--j0", "-1", "--j1", "2", "--format", "structured"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["size"], 3);
    assert_eq!(v["word"].as_str().unwrap().split_whitespace().count(), 6);
}

#[test]
fn verify_periodicity_reports_period_ten() {
    let (code, out, _) = call(&["verify", "periodicity", "--r", "1", "--l", "2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("minimal period 10"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["solve"]).0, EXIT_USAGE);
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["solve", "--query", "1,1"]).0, EXIT_USAGE);
    assert_eq!(call(&["solve", "--query", "0,0,2", "--method", "nope"]).0, EXIT_USAGE);
    assert_eq!(call(&["verify", "nope"]).0, EXIT_USAGE);
    assert_eq!(call(&["solve", "--query", "0,0,40", "--max-window", "16"]).0, EXIT_TOO_LARGE);
    assert_eq!(call(&["solve", "--query", "1,0,9", "--r", "3", "--max-terms", "10"]).0, EXIT_TOO_LARGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join(format!("octahedron-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.json");
    let cfg = r#"{
        "version": 1,
        "command": "solve",
        "boundary": {"kind": "ar", "r": 2},
        "surface": {"type": "flat", "offset": 0},
        "mutations": [{"i": 1, "j": 1, "direction": "forward"}],
        "queries": [[1, 0, 3]],
        "method": "all",
        "format": "text"
    }"#;
    std::fs::write(&path, cfg).unwrap();
    let p = path.to_str().unwrap();
    let (code, text, err) = call(&["solve", "--config", p]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(text.starts_with("T(1,0,3) [oracle] = "));
    let (code, structured, _) = call(&["solve", "--config", p, "--format", "structured"]);
    assert_eq!(code, EXIT_OK);
    for line in structured.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["query", "method", "polynomial", "stats"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
    assert_eq!(call(&["mutate", "--config", p]).0, EXIT_USAGE);
    std::fs::write(&path, r#"{"version": 7}"#).unwrap();
    assert_eq!(call(&["solve", "--config", p, "--query", "0,0,2"]).0, EXIT_USAGE);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_schema_parses() {
    let cfg = RunConfig::from_json(
        r#"{"version": 1, "data": {"type": "family", "symmetric": {"family": "periodic", "r": 2, "l": 1}, "regularized": true},
            "boundary": {"kind": "ar", "r": 2}, "verify": {"suites": ["boundary"], "r": 2, "l": 1}}"#,
    )
    .unwrap();
    assert!(cfg.data.is_some());
    assert!(RunConfig::from_json(r#"{"version": 1, "colour": "red"}"#).is_err());
}

#[test]
fn regularized_family_data_gives_limits() {
    let (code, out, err) = call(&["solve", "--r", "1", "--l", "2", "--data", "restricted", "--regularized", "--query", "1,0,3", "--method", "general-minor"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(polynomial_of(out.trim()), "+1");
}

#[test]
fn rational_data_runs_the_recursion() {
    let (code, out, _) = call(&["oracle", "--r", "2", "--data", "rational", "--seed", "3", "--query", "1,0,3"]);
    assert_eq!(code, EXIT_OK);
    let (_, again, _) = call(&["oracle", "--r", "2", "--data", "rational", "--seed", "3", "--query", "1,0,3"]);
    assert_eq!(out, again);
    assert_eq!(call(&["solve", "--r", "2", "--data", "rational", "--query", "1,0,3", "--method", "lgv"]).0, EXIT_USAGE);
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "equivalence", "--seed", "5", "--format", "structured"];
    assert_eq!(call(&args).1, call(&args).1);
    let args = ["solve", "--r", "3", "--query", "2,0,4", "--format", "structured"];
    assert_eq!(call(&args).1, call(&args).1);
}

#[test]
fn coverage_manifest_names_known_suites() {
    for (result, suite) in COVERAGE {
        assert!(SUITES.contains(suite), "{result} maps to unknown suite {suite}");
    }
    for suite in SUITES {
        assert!(COVERAGE.iter().any(|(_, s)| s == &suite), "suite {suite} covers nothing");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_octahedron");
    let status = std::process::Command::new(bin).args(["solve", "--query", "0,0,2"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    let status = std::process::Command::new(bin).args(["solve"]).output().unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
}
