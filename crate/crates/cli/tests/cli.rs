use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superfield")).args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_superfield"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(cmd: &str, file: &str) -> String {
    let out = run(&[cmd, &data(file)]);
    assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Parses whitespace-separated decimals.
fn numbers(text: &str) -> Vec<f64> {
    text.split_whitespace().map(|t| t.parse().unwrap()).collect()
}

fn write_temp(name: &str, text: &str) -> String {
    let p = std::env::temp_dir().join(format!("superfield-cli-{}-{name}", std::process::id()));
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn jet_of_a_monomial() {
    assert_eq!(stdout("jet", "jet.json"), "x^2*y + 2*x*y*dx + x^2*dy + y*dx^2 + 2*x*dx*dy\n");
}

#[test]
fn normal_coordinates() {
    // Gamma = x: dx = xi - x xi^2 / 2 + (2 x^2 - 1) xi^3 / 6
    assert_eq!(stdout("normal", "normal.json"), "dx = xi - 1/2*x*xi^2 - 1/6*xi^3 + 1/3*x^2*xi^3\n");
}

#[test]
fn phi_with_a_bundle() {
    assert_eq!(
        stdout("phi", "phi.json"),
        "x^2*v + 2*x*xi*v - x^2*xi*v + xi^2*v - 2*x*xi^2*v - 1/2*x^2*xi^2*v + 1/2*x^3*xi^2*v\n"
    );
}

#[test]
fn psi_from_flat() {
    assert_eq!(stdout("psi", "psi.json"), "xi = xi - 1/2*x*xi^2\nPsi(x*xi) = x*xi - 1/2*x^2*xi^2\n");
}

#[test]
fn section_and_morphism_round_trip_through_a_pipe() {
    let section = stdout("to-section", "morphism.json");
    let doc: serde_json::Value = serde_json::from_str(&section).unwrap();
    let s = &doc["sections"][0];
    assert_eq!(s["base_map"][0], "y^2");
    assert_eq!(s["tangent"][0]["value"], "y");
    let out = run_stdin(&["to-morphism", "-"], section.as_bytes());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x = y^2 + y*th1*th2\neta = th1 + y*th2\n");
}

#[test]
fn section_checks() {
    assert_eq!(stdout("even-check", "section.json"), "even\n");
    assert_eq!(stdout("curry", "section.json"), "x [1] [1] = -z\neta [] [1] = 3*z\neta [1] [] = 1\n");
    assert_eq!(stdout("diag-check", "morphism.json"), "0\n");
}

#[test]
fn failing_checks_exit_with_one() {
    let text = std::fs::read_to_string(data("morphism.json")).unwrap().replace("(x' - x)^3", "x' - x");
    let out = run(&["diag-check", &write_temp("diag.json", &text)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    let text = std::fs::read_to_string(data("section.json"))
        .unwrap()
        .replace(r#""indices": [2], "value": "3*z""#, r#""indices": [1, 2], "value": "3*z""#)
        .replace(r#""name": "s", "source""#, r#""name": "s", "mode": "all", "source""#);
    let out = run(&["even-check", &write_temp("odd.json", &text)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn numeric_commands_match_closed_forms() {
    // Gamma = 1/2 gives exp_x(v) = x + 2 ln(1 + v/2).
    let exp = numbers(&stdout("exp", "numeric.json"));
    assert!((exp[0] - 2.0 * 1.4f64.ln()).abs() < 1e-10);
    let psi = numbers(&stdout("chart-psi", "numeric.json"));
    let expected = [2.0 * 1.4f64.ln(), 0.1, 0.2 + 2.0 * 0.8f64.ln()];
    for (a, b) in psi.iter().zip(expected) {
        assert!((a - b).abs() < 1e-10, "{a} vs {b}");
    }
    let phi = numbers(&stdout("chart-phi", "numeric.json"));
    let expected = [2.0 * (0.15f64.exp() - 1.0), 0.0, 2.0 * ((-0.2f64).exp() - 1.0)];
    for (a, b) in phi.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
    // A = 3/4 transports 2 along a path from 0 to 1.5 to 2 exp(-9/8).
    let t = numbers(&stdout("transport", "numeric.json"));
    assert!((t[0] - 2.0 * (-1.125f64).exp()).abs() < 1e-9);
}

#[test]
fn input_errors_exit_with_two() {
    assert_eq!(run(&["jet", "/nonexistent/doc.json"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run_stdin(&["jet", "-"], b"{ not json").status.code(), Some(2));
    let missing_run = r#"{"charts": [{"name": "N", "coords": ["x"]}]}"#;
    assert_eq!(run_stdin(&["jet", "-"], missing_run.as_bytes()).status.code(), Some(2));
    let bad = std::fs::read_to_string(data("jet.json")).unwrap().replace("x^2*y", "x^-2");
    let out = run_stdin(&["jet", "-"], bad.as_bytes());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
}

#[test]
fn verify_reports_and_is_reproducible() {
    let a = run(&["verify", "--suite", "supermap", "--seed", "3", "--cases", "4"]);
    let b = run(&["verify", "--suite", "supermap", "--seed", "3", "--cases", "4"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with("suite supermap seed 3 cases 4\n"));
    assert!(text.ends_with("5/5 checks passed\n"), "{text}");
    assert_eq!(run(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}
