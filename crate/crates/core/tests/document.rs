use proptest::prelude::*;
use rand::Rng;

use superfield::io::{raw_chart, raw_morphism, raw_supermanifold, RawDocument, SpecDocument};
use superfield::random::{self, case_rng};
use superfield::supermap::ParityMode;
use superfield::Error;

const BASE: &str = r#"{
  "charts": [{"name": "M", "coords": ["y"]}, {"name": "N", "coords": ["x"]}],
  "supermanifolds": [
    {"name": "SM", "chart": "M", "odd": ["th1", "th2"]},
    {"name": "SN", "chart": "N", "odd": ["eta"]}
  ],
  "connections": [{"name": "G", "chart": "N", "gamma": [[["x"]]]}],
  "morphisms": [{"name": "f", "source": "SM", "target": "SN", "x": ["y"], "eta": ["th1"]}],
  "grids": [{"name": "K", "points": [[0.0], [1.0]]}],
  "maps": [{"name": "m", "grid": "K", "values": [[0.0], [0.5]]}]
}"#;

fn message(text: &str) -> String {
    SpecDocument::parse(text).unwrap_err().to_string()
}

#[test]
fn base_document_parses() {
    let doc = SpecDocument::parse(BASE).unwrap();
    assert_eq!(doc.morphism("f").unwrap().eta_pullbacks()[0].to_string(), "th1");
    assert_eq!(doc.map("m").unwrap().values.len(), 2);
    assert!(doc.bundle("V").is_err());
}

#[test]
fn json_errors_report_line_and_column() {
    let broken = BASE.replacen("\"M\"", "'M'", 1);
    let err = SpecDocument::parse(&broken).unwrap_err();
    assert!(matches!(err, Error::Document(_)));
    let text = err.to_string();
    assert!(text.contains("line 2"), "{text}");
}

#[test]
fn unknown_fields_are_rejected() {
    let text = BASE.replace(r#""odd": ["eta"]"#, r#""odd": ["eta"], "even": []"#);
    assert!(message(&text).contains("even"));
}

#[test]
fn negative_exponent_is_a_syntax_error() {
    let text = BASE.replace(r#""x": ["y"]"#, r#""x": ["y^-1"]"#);
    let err = message(&text);
    assert!(err.contains("morphisms.f.x[0]") && err.contains("column 3"), "{err}");
}

#[test]
fn classical_morphisms_respect_parity() {
    let text = BASE.replace(r#""eta": ["th1"]"#, r#""eta": ["th1*th2"]"#);
    assert!(message(&text).contains("morphisms.f"));
    let inner = text.replace(r#""x": ["y"]"#, r#""mode": "all", "x": ["y"]"#);
    assert!(message(&inner).contains("morphisms.f"));
    let fixed = inner.replace("th1*th2", "th1*th2*eps + th1");
    SpecDocument::parse(&fixed).unwrap();
}

#[test]
fn shapes_are_checked() {
    let text = BASE.replace(r#"[[["x"]]]"#, r#"[[["x", "1"]]]"#);
    assert!(message(&text).contains("connections.G"));
    let text = BASE.replace(r#""values": [[0.0], [0.5]]"#, r#""values": [[0.0]]"#);
    assert!(message(&text).contains("maps.m"));
    let text = BASE.replace(r#""grid": "K""#, r#""grid": "L""#);
    assert!(message(&text).contains("`L`"));
}

#[test]
fn duplicate_names_are_rejected() {
    let text = BASE.replace(
        r#"{"name": "N", "coords": ["x"]}"#,
        r#"{"name": "N", "coords": ["x"]}, {"name": "N", "coords": ["w"]}"#,
    );
    assert!(message(&text).contains("`N`"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn written_morphisms_read_back(seed in any::<u64>(), all in any::<bool>()) {
        let rng = &mut case_rng(seed, 0, 0);
        let m = random::chart("M", rng.gen_range(1..=2));
        let n = random::chart("N", rng.gen_range(1..=2));
        let n = superfield::Chart::new("N", n.coords().iter().map(|c| c.replace('x', "u"))).unwrap();
        let src = random::presentation("SM", &m, "th", rng.gen_range(0..=3));
        let dst = random::presentation("SN", &n, "eta", rng.gen_range(0..=2));
        let mode = if all { ParityMode::All } else { ParityMode::Even };
        let f = random::morphism(rng, &src, &dst, mode, 2).unwrap();
        let raw = RawDocument {
            charts: vec![raw_chart(&m), raw_chart(&n)],
            supermanifolds: vec![raw_supermanifold(&src), raw_supermanifold(&dst)],
            morphisms: vec![raw_morphism("f", &f)],
            ..Default::default()
        };
        let doc = SpecDocument::parse(&serde_json::to_string(&raw).unwrap()).unwrap();
        prop_assert_eq!(doc.morphism("f").unwrap(), &f);
    }
}
