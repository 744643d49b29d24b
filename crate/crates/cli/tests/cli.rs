use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gthbe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gthbe"))
        .arg("--quiet")
        .args(args)
        .env_remove("GTHBE_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gthbe-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn estimate_reports_diamond_block_encoding() {
    let out = gthbe(&["estimate", "--cell", "diamond", "--bits", "6,6,6", "--b", "20", "--interp", "linear:256", "--epsilon", "1.6e-3"]);
    let v = json(&out);
    let total = v["cost"]["total"].as_u64().unwrap();
    assert!((total as f64 / 23576.0 - 1.0).abs() < 0.03, "{total}");
    let entries: u64 = v["cost"]["entries"].as_array().unwrap().iter().map(|e| e["toffolis"].as_u64().unwrap()).sum();
    assert_eq!(entries, total);
    assert_eq!(v["system"]["electrons"], 216);
    assert!(v["boxes"]["success_probability"].as_f64().unwrap() > 0.2);
    assert!(v["qpe"].is_null() && v["cost"]["qpe"]["iterations"].as_u64().unwrap() > 0);
    assert!(v["provenance"]["dataset"].as_str().unwrap().contains("gth"));
}

#[test]
fn json_output_round_trips_and_is_deterministic() {
    let args = ["lambda", "--cell", "LNO-C2m", "--bits", "3,3,3", "--per-species", "--interp-error"];
    let a = gthbe(&args);
    let b = gthbe(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let mut again = serde_json::to_vec_pretty(&v).unwrap();
    again.push(b'\n');
    assert_eq!(serde_json::from_slice::<Value>(&again).unwrap(), v);
    assert_eq!(again, a.stdout);
    assert_eq!(v["lambda"]["species"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_cell_file_is_an_input_error() {
    let out = gthbe(&["cost", "--cell", "/nonexistent/cell.toml", "--bits", "5,5,5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
    let out = gthbe(&["cost", "--cell", "diamond"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn brute_force_at_five_bits_is_infeasible() {
    let out = gthbe(&["lambda", "--cell", "diamond", "--bits", "5,5,5", "--strategy", "brute"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hint"));
}

#[test]
fn ledger_csv_sums_to_total() {
    let out = gthbe(&["cost", "--cell", "Pt-2x2", "--bits", "5,5,7", "--ledger", "--format", "csv"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let mut sum = 0u64;
    let mut total = None;
    for rec in r.records() {
        let rec = rec.unwrap();
        let t: u64 = rec[2].parse().unwrap();
        if &rec[0] == "total" {
            total = Some(t);
        } else {
            sum += t;
        }
    }
    assert_eq!(Some(sum), total);
}

#[test]
fn golden_tables_pass_and_corruption_is_named() {
    let out = gthbe(&["compare-golden", "success-probabilities", "--rows", "diamond"]);
    let mut v = json(&out);
    assert_eq!(v["pass"], true);
    assert_eq!(v["cells"].as_array().unwrap().len(), 3);

    let out = gthbe(&["compare-golden", "local-integrals"]);
    assert_eq!(json(&out)["pass"], true);

    v["cells"][1]["computed"] = Value::from(0.3);
    let dir = scratch_dir("golden");
    let path = dir.join("corrupt.json");
    std::fs::write(&path, serde_json::to_vec(&v).unwrap()).unwrap();
    let out = gthbe(&["compare-golden", "success-probabilities", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["failed"], serde_json::json!(["diamond/n=6"]));
}

const DIAMOND_PRIMITIVE: &str = r#"
name = "diamond-primitive"
units = "angstrom"
lattice = [[0.0, 1.7835, 1.7835], [1.7835, 0.0, 1.7835], [1.7835, 1.7835, 0.0]]
coordinates = "fractional"
bits = [4, 4, 4]

[[atoms]]
species = "C"
position = [0.0, 0.0, 0.0]

[[atoms]]
species = "C"
position = [0.25, 0.25, 0.25]
"#;

const CARBON_BOX: &str = r#"
lattice = [[6.74, 0.0, 0.0], [0.0, 6.74, 0.0], [0.0, 0.0, 6.74]]

[species]
C = 2
"#;

#[test]
fn toml_cells_and_data_directory() {
    let dir = scratch_dir("toml");
    let path = dir.join("diamond-primitive.toml");
    std::fs::write(&path, DIAMOND_PRIMITIVE).unwrap();
    let v = json(&gthbe(&["cost", "--cell", path.to_str().unwrap()]));
    assert_eq!(v["system"]["electrons"], 8);
    assert_eq!(v["system"]["grid"], serde_json::json!([4, 4, 4]));
    assert_eq!(v["cost"]["arith_case"]["case"], "diamond");

    std::fs::write(dir.join("carbon-box.toml"), CARBON_BOX).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_gthbe"))
        .args(["-q", "boxes", "--cell", "carbon-box", "--bits", "5,5,5", "--add", "O:1"])
        .env("GTHBE_DATA_DIR", &dir)
        .output()
        .unwrap();
    let v = json(&out);
    assert_eq!(v["system"]["electrons"], 14);
    assert_eq!(v["system"]["grid"], serde_json::json!([5, 5, 5]));
}

#[test]
fn gth_text_round_trips_through_parse() {
    let out = gthbe(&["gth", "show", "Ni"]);
    assert!(out.status.success());
    let dir = scratch_dir("gth");
    let path = dir.join("ni.gth");
    std::fs::write(&path, &out.stdout).unwrap();
    let parsed = json(&gthbe(&["gth", "parse", path.to_str().unwrap()]));
    let shown = json(&gthbe(&["gth", "show", "Ni", "--json"]));
    assert_eq!(parsed["species"][0], shown);

    std::fs::write(&path, "Ni GTH\n 2 0 x\n").unwrap();
    assert_eq!(gthbe(&["gth", "parse", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn interp_error_csv_lists_each_table() {
    let out = gthbe(&["interp-error", "--interp", "linear:256", "--interp", "quadratic:128", "--format", "csv", "--samples", "4096"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("linear:256,"));
}

#[test]
fn qpe_with_explicit_lambda_uses_the_ceiling_formula() {
    let v = json(&gthbe(&["qpe", "--cell", "diamond", "--bits", "6,6,6", "--lambda-value", "1000", "--epsilon", "1e-3"]));
    let c_be = v["block_encoding"].as_u64().unwrap();
    let it = (1000.0 * std::f64::consts::PI / 2e-3).ceil() as u64;
    assert_eq!(v["qpe"]["iterations"].as_u64().unwrap(), it);
    assert_eq!(v["qpe"]["toffolis"].as_u64().unwrap(), it * c_be);
}
