use std::path::{Path, PathBuf};
use std::process::Command;

use copocone::{random_unit_symmetric, Seed, SymMatrix};
use copocone_cli::{format_matrix, load_matrix, parse_matrix, run, write_matrix, CliError};
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn invoke(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("copocone").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn invoke_json(args: &[&str]) -> (u8, Value) {
    let (code, out, err) = invoke(args);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out:?} / {err:?}"));
    (code, v)
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks the subset of JSON Schema the shipped schema uses.
fn validate(root: &Value, schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.trim_start_matches("#/$defs/");
        return validate(root, &root["$defs"][name], v, at);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let ok = options.iter().filter(|s| validate(root, s, v, at).is_ok()).count();
        return if ok == 1 { Ok(()) } else { Err(format!("{at}: {ok} oneOf branches match")) };
    }
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let matches = |t: &str| match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            "string" => v.is_string(),
            _ => false,
        };
        if !types.iter().any(|t| matches(t)) {
            return Err(format!("{at}: {v} is not {types:?}"));
        }
        if v.is_null() {
            return Ok(());
        }
    }
    if let Some(e) = schema.get("enum").and_then(Value::as_array) {
        if !e.contains(v) {
            return Err(format!("{at}: {v} not in enum"));
        }
    }
    if let (Some(min), Some(x)) = (schema.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return Err(format!("{at}: {x} < {min}"));
        }
    }
    if let Some(req) = schema.get("required").and_then(Value::as_array) {
        for k in req.iter().filter_map(Value::as_str) {
            if v.get(k).is_none() {
                return Err(format!("{at}: missing {k}"));
            }
        }
    }
    if let (Some(props), Some(obj)) = (schema.get("properties").and_then(Value::as_object), v.as_object()) {
        for (k, s) in props {
            if let Some(x) = obj.get(k) {
                validate(root, s, x, &format!("{at}.{k}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(root, items, x, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

fn assert_schema(kind: &str, v: &Value) {
    let root = schema();
    validate(&root, &root["$defs"][kind], v, kind).unwrap();
}

#[test]
fn check_identity() {
    let (code, v) = invoke_json(&["check", &fixture("id3.txt")]);
    assert_eq!(code, 0);
    assert_eq!(v["member"], true);
    assert_eq!(v["margin"], 1.0);
    assert_schema("check", &v);
}

#[test]
fn check_non_member_with_oracle() {
    let (code, v) = invoke_json(&["check", &fixture("star.txt"), "--oracle", "60"]);
    assert_eq!(code, 0);
    assert_eq!(v["member"], false);
    assert_eq!(v["certificate"]["kind"], "witness");
    assert_eq!(v["oracle"]["agrees"], true);
    assert!(v["oracle"]["value"].as_f64().unwrap() < 0.0);
    assert_schema("check", &v);
}

#[test]
fn classify_reports_case_and_scaling() {
    let (code, v) = invoke_json(&["classify", &fixture("star.txt")]);
    assert_eq!(code, 0);
    assert_eq!(v["case_signature"]["negatives_above_diagonal"], 2);
    assert_eq!(v["scaled_params"]["alpha"], -1.0);
    assert_eq!(v["psd"], false);
    assert_schema("classify", &v);

    let (_, v) = invoke_json(&["classify", &fixture("padded_a.txt")]);
    assert!(v["scaled_params"].is_null());
    assert_eq!(v["psd"], true);
    assert_schema("classify", &v);
}

#[test]
fn angle_of_padded_pair() {
    let (code, v) = invoke_json(&["angle", &fixture("padded_a.txt"), &fixture("padded_b.txt")]);
    assert_eq!(code, 0);
    assert!((v["angle_over_pi"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert_schema("angle", &v);
}

#[test]
fn angle_with_infeasible_member_exits_one() {
    let (code, v) = invoke_json(&["angle", &fixture("star.txt"), &fixture("id3.txt")]);
    assert_eq!(code, 1);
    assert_eq!(v["a_copositive"], false);
}

#[test]
fn search_order3() {
    let (code, v) = invoke_json(&["search", "--n", "3", "--starts", "64", "--seed", "42"]);
    assert_eq!(code, 0);
    let best = v["best_angle"].as_f64().unwrap() / std::f64::consts::PI;
    assert!((best - 0.75).abs() < 1e-6, "{best}");
    assert_schema("search", &v);
}

#[test]
fn search_csv_and_psi() {
    let (code, out, _) = invoke(&["search", "--n", "2", "--starts", "4", "--seed", "1", "--csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "index,final_angle,angle_over_pi,iterations,converged");
    assert_eq!(lines.len(), 5);

    let (code, v) = invoke_json(&["psi", "--n", "4", "--starts", "8", "--seed", "3"]);
    assert_eq!(code, 0);
    assert!((v["best_angle"].as_f64().unwrap() - 0.75 * std::f64::consts::PI).abs() < 1e-6);
    assert_schema("search", &v);
}

#[test]
fn searches_are_deterministic() {
    let args = ["search", "--n", "3", "--starts", "8", "--seed", "5"];
    assert_eq!(invoke(&args).1, invoke(&args).1);
    let args = ["psi", "--n", "5", "--starts", "8", "--seed", "5"];
    assert_eq!(invoke(&args).1, invoke(&args).1);
}

#[test]
fn family_blocks_reload() {
    let (code, out, _) = invoke(&["family", "--a22", "0.2"]);
    assert_eq!(code, 0);
    let blocks: Vec<&str> = out.split("# B\n").collect();
    let a = parse_matrix(blocks[0]).unwrap();
    let b = parse_matrix(blocks[1].split("# inner").next().unwrap()).unwrap();
    assert!((a.dot(&b).unwrap() + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!(out.contains("# inner -7.0710678118654"));
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(invoke(&[]).0, 2);
    assert_eq!(invoke(&["frobnicate"]).0, 2);
    assert_eq!(invoke(&["search", "--n", "three"]).0, 2);
    assert_eq!(invoke(&["check", &fixture("asym.txt")]).0, 2);
    assert_eq!(invoke(&["check", &fixture("trailing.txt")]).0, 2);
    let (code, _, err) = invoke(&["check", "/nonexistent/matrix.txt"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot access"));
}

#[test]
fn domain_errors_exit_one() {
    assert_eq!(invoke(&["family", "--a22", "0.7"]).0, 1);
    assert_eq!(invoke(&["search", "--n", "5", "--starts", "2"]).0, 1);
    assert_eq!(invoke(&["psi", "--n", "7"]).0, 1);
}

#[test]
fn loader_contract() {
    assert_eq!(load_matrix(Path::new(&fixture("id3.txt"))).unwrap().upper(), SymMatrix::identity(3).upper());
    let t2 = load_matrix(Path::new(&fixture("theta2.txt"))).unwrap();
    let want = SymMatrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]).unwrap();
    assert_eq!(t2.upper(), want.upper());
    assert!(matches!(load_matrix(Path::new(&fixture("asym.txt"))), Err(CliError::Asymmetry { .. })));
}

#[test]
fn binary_exit_codes() {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_copocone"));
    let ok = Command::new(&bin).args(["check", &fixture("id3.txt")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["member"], true);
    let bad = Command::new(&bin).args(["check", &fixture("asym.txt")]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}

#[test]
fn reproduce_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let (code, out, _) = invoke(&["reproduce", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("name,paper_value,computed,abs_error,tolerance,pass,seconds"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert!(rows.iter().all(|r| r.len() == 7 && r[5] == "true"));
    for name in ["theta3_multistart", "case11_inner", "psi5"] {
        assert!(rows.iter().any(|r| r[0] == name), "{name}");
    }
}

proptest! {
    #[test]
    fn written_matrices_reload_bit_identically(n in 1usize..7, s in any::<u64>(), scale in -20i32..20) {
        let m = &random_unit_symmetric(n, Seed(s)) * 10f64.powi(scale);
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        prop_assert_eq!(back.upper(), m.upper());
        prop_assert_eq!(format_matrix(&back), format_matrix(&m));
    }

    #[test]
    fn file_round_trip(s in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let m = random_unit_symmetric(3, Seed(s));
        write_matrix(&path, &m).unwrap();
        let back = load_matrix(&path).unwrap();
        prop_assert_eq!(back.upper(), m.upper());
    }
}
