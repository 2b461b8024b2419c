mod common;

use common::fixture_path;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("catbound").chain(args.iter().copied());
    let code = catbound::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path(name: &str) -> String {
    fixture_path(name).display().to_string()
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn golden_bound_json() {
    let (code, out, _) = run(&["bound", &path("intro_examples.catb"), "--family", "am", "--target", "SurfaceLike", "--format", "json"]);
    assert_eq!(code, 0);
    let golden = include_str!("golden/bound_surfacelike_am.json");
    assert_eq!(out.trim_end(), golden.trim_end());
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"], 2);
    assert_eq!(v["trace"]["rule"], "gog-max");
}

#[test]
fn validate_reports_positions_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.catb");
    std::fs::write(&bad, "group A {\n  gd <= \n}\n").unwrap();
    let (code, out, err) = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("bad.catb:3:1"), "{err}");

    let (code, out, _) = run(&["validate", &path("polygons.catb")]);
    assert_eq!(code, 0);
    assert!(out.contains("ok"));
}

#[test]
fn missing_file_and_unknown_target_fail() {
    let (code, _, err) = run(&["bound", "/nonexistent/x.catb", "--target", "A"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
    let (code, _, err) = run(&["bound", &path("intro_examples.catb"), "--target", "Nope"]);
    assert_eq!(code, 1);
    assert!(err.contains("Nope"), "{err}");
    let (code, _, _) = run(&["frobnicate"]);
    assert_ne!(code, 0);
}

#[test]
fn small_sheet_counts_are_refused() {
    let (code, out, err) = run(&["certify", "branched", &path("ex_branched.catb"), "--target", "Ex46", "--d", "3"]);
    assert_eq!(code, 1);
    assert!(out.is_empty());
    assert!(err.contains("d ≥ 4"), "{err}");
}

#[test]
fn inconclusive_certificates_exit_two() {
    let (code, out, _) = run(&["certify", "branched", &path("polygons.catb"), "--target", "Concrete"]);
    assert_eq!(code, 2);
    assert!(out.contains("[FAILED] Thm 4.4(iv)"), "{out}");
    let (code, out, _) = run(&["certify", "double", &path("ex_twisted_double_max.catb"), "--target", "Ex310"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("conclusion: simplicial volume vanishes"), "{out}");
    assert!(out.contains("cat_am <= 2"));
}

#[test]
fn literature_normalisation_only_shifts_the_value() {
    let base = ["bound", &path("intro_examples.catb"), "--target", "SurfaceLike", "--format", "json"].map(String::from);
    let native = json(&base.iter().map(String::as_str).collect::<Vec<_>>());
    let mut lit_args: Vec<&str> = base.iter().map(String::as_str).collect();
    lit_args.push("--literature-normalisation");
    let lit = json(&lit_args);
    assert_eq!(lit["value"], 3);
    assert_eq!(lit["normalisation"], "literature");
    assert_eq!(native["trace"], lit["trace"]);
    assert_eq!(native["assumed"], lit["assumed"]);

    // infinite values stay infinite
    let v = json(&["bound", &path("intro_examples.catb"), "--target", "Z2", "--invariant", "gd", "--format", "json", "--literature-normalisation"]);
    assert_eq!(v["value"], "inf");
}

#[test]
fn text_output_lists_assumptions() {
    let (code, out, _) = run(&["bound", &path("intro_examples.catb"), "--target", "SurfaceLike"]);
    assert_eq!(code, 0);
    assert!(out.contains("ASSUMED:"));
    assert!(out.contains("injections of edge e0 in SurfaceLike: asserted"));
    let (_, out, _) = run(&["bound", &path("intro_examples.catb"), "--target", "FreeZZ"]);
    assert!(out.contains("ASSUMED: none"));
}

#[test]
fn tc_and_gd_commands() {
    let v = json(&["tc", &path("intro_examples.catb"), "--target", "FreeZZ", "--format", "json"]);
    assert_eq!(v["value"], 2);
    let v = json(&["bound", &path("intro_examples.catb"), "--target", "FreeZZ", "--invariant", "gd", "--format", "json"]);
    assert_eq!(v["value"], 1);
    let v = json(&["bound", &path("intro_examples.catb"), "--target", "FinAmalgam", "--family", "fin", "--format", "json"]);
    // infinite, acting on its tree with finite stabilizers
    assert_eq!(v["value"], 1);
}

#[test]
fn develop_and_curvature() {
    let v = json(&["develop", &path("intro_examples.catb"), "--target", "FinAmalgam", "--radius", "1", "--format", "json"]);
    assert!(v.get("ball").is_some() && v.get("stabilizers").is_some());
    let (code, out, _) = run(&["develop", &path("intro_examples.catb"), "--target", "FinAmalgam", "--radius", "1"]);
    assert_eq!(code, 0);
    assert!(out.contains("3 0-cells, 2 1-cells"), "{out}");
    assert!(out.contains("all match"));

    let (code, out, _) = run(&["check-curvature", &path("polygons.catb"), "--target", "Square"]);
    assert_eq!(code, 0);
    assert!(!out.is_empty());
    // no concrete model behind SurfaceLike
    let (code, _, _) = run(&["develop", &path("intro_examples.catb"), "--target", "SurfaceLike"]);
    assert_eq!(code, 1);
}

#[test]
fn prelude_can_be_replaced() {
    let dir = tempfile::tempdir().unwrap();
    let prelude = dir.path().join("prelude.catb");
    std::fs::write(&prelude, "group Q { gd <= 7 }\n").unwrap();
    let model = dir.path().join("m.catb");
    std::fs::write(&model, "group R = Q x Q\n").unwrap();
    let v = json(&["bound", model.to_str().unwrap(), "--target", "R", "--invariant", "gd", "--format", "json", "--prelude", prelude.to_str().unwrap()]);
    assert_eq!(v["value"], 14);
}
