use std::path::PathBuf;
use std::process::{Command, Output};

fn cframe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cframe"))
        .args(args)
        .env_remove("CFRAME_SEED")
        .output()
        .expect("spawn cframe")
}

fn scenario(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    root.join(name).to_string_lossy().into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_temp(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

const NOT_A_FRAME: &str = r#"
rank = 1
[algebra]
dim = 2
structure = "diagonal"
[measure]
kind = "discrete-counting"
nodes = 2
[frame]
kind = "explicit"
vectors = [ [ [1.0, 0.0] ], [ [2.0, 0.0] ] ]
"#;

#[test]
fn json_reports_are_byte_identical() {
    let path = scenario("random_full.toml");
    let a = cframe(&["analyze", &path, "--format", "json"]);
    let b = cframe(&["analyze", &path, "--format", "json"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_temp(&dir, "r.toml", &std::fs::read_to_string(scenario("random_full.toml")).unwrap().replace("seed = 2024\n", ""));
    let seed_of = |out: Output| -> u64 {
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(seed_of(cframe(&["analyze", &path, "--format", "json"])), 0);
    assert_eq!(seed_of(cframe(&["analyze", &path, "--format", "json", "--seed", "9"])), 9);
    let env = Command::new(env!("CARGO_BIN_EXE_cframe"))
        .args(["analyze", &path, "--format", "json"])
        .env("CFRAME_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(seed_of(env), 11);
    // A seed written in the file wins over both.
    let fixed = scenario("random_full.toml");
    assert_eq!(seed_of(cframe(&["analyze", &fixed, "--format", "json", "--seed", "9"])), 2024);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cframe(&["verify", &scenario("example1.toml")]).status.code(), Some(0));

    let degenerate = write_temp(&dir, "degenerate.toml", NOT_A_FRAME);
    let out = cframe(&["verify", &degenerate]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict.frame"));
    assert_eq!(cframe(&["analyze", &degenerate]).status.code(), Some(0));

    let typo = write_temp(&dir, "typo.toml", "[frame]\nkind = \"example1\"\nalpah = 1.0\n");
    let out = cframe(&["analyze", &typo]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpah"));

    assert_eq!(cframe(&["analyze", "/nonexistent/x.toml"]).status.code(), Some(2));
    assert_eq!(cframe(&["analyze", "example1", "--alpha", "-1"]).status.code(), Some(2));
    assert_eq!(cframe(&["reconstruct", "example1", "--tol", "2"]).status.code(), Some(2));
    assert_eq!(cframe(&["suite", "--cases", "0"]).status.code(), Some(2));
}

#[test]
fn suite_exit_code_tracks_failures() {
    assert_eq!(cframe(&["suite", "--cases", "4"]).status.code(), Some(0));
    let out = cframe(&["suite", "--cases", "4", "--conversion", "statement", "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let failure = &v["suite"]["failures"][0];
    assert_eq!(failure["property"], "scalar_conversion_soundness");
    assert!(failure["case"].is_u64() && failure["seed"].is_u64());
}

#[test]
fn csv_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.csv");
    let target_str = target.to_string_lossy().into_owned();
    let out = cframe(&["analyze", "example1", "--format", "csv", "--out", &target_str]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("quantity,value\nlower_bound,"));
    for line in text.lines().skip(1) {
        let value = line.split(',').nth(1).unwrap();
        assert!(value.parse::<f64>().is_ok(), "{line}");
    }
}

#[test]
fn reconstruct_reports_a_trace() {
    let out = cframe(&["reconstruct", &scenario("example2.toml"), "--tol", "1e-8", "--format", "json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let trace = &v["instance"]["neumann"];
    assert!(trace["relative_error"].as_f64().unwrap() <= 1e-7);
    assert!(trace["iterations"].as_u64().unwrap() as usize >= trace["residuals"].as_array().unwrap().len());
    assert_eq!(v["verdicts"]["reconstruction"], true);
}

#[test]
fn dump_frame_lists_full_matrices() {
    let out = cframe(&["dump-frame", &scenario("explicit.toml")]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("node,omega,weight,component,row,col,re,im"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 4);
    let imag_unit = rows.iter().find(|r| r[0] == "0" && r[4] == "1" && r[5] == "1").unwrap();
    assert_eq!(imag_unit[7].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn human_output_shows_wall_time_but_json_does_not() {
    let human = stdout(&cframe(&["analyze", "example1"]));
    assert!(human.lines().any(|l| l.starts_with("wall_time")));
    let json = stdout(&cframe(&["analyze", "example1", "--format", "json"]));
    assert!(!json.contains("wall_time"));
}
