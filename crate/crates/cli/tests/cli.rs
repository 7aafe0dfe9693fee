use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_ppcalc"))
        .args(args)
        .current_dir(env!("CARGO_TARGET_TMPDIR"))
        .output()
        .expect("spawn ppcalc");
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

fn run_json(args: &[&str]) -> (Value, i32) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let (out, code) = run(&all);
    (serde_json::from_str(&out).unwrap(), code)
}

#[test]
fn check_eq_holds() {
    let (out, code) = run(&["algebra", "check-eq", "PP6", "**x = 1"]);
    assert!(out.starts_with("HOLDS"), "{out}");
    assert_eq!(code, 0);
}

#[test]
fn check_eq_fails_with_witness() {
    let (out, code) = run(&["algebra", "check-eq", "DM4", "x | ~x = 1"]);
    assert!(out.starts_with("FAILS"), "{out}");
    assert!(out.contains("witness: x=n"), "{out}");
    assert_eq!(code, 1);
}

#[test]
fn check_class_reports_membership() {
    assert_eq!(run(&["algebra", "check-class", "IS4", "IS"]).1, 0);
    assert_eq!(run(&["algebra", "check-class", "PP5", "PP"]).1, 0);
}

#[test]
fn translate_perfection_to_nabla() {
    let (out, code) = run(&["algebra", "translate", "--to", "is", "*p"]);
    assert_eq!(out.trim(), "~!(p & ~p)");
    assert_eq!(code, 0);
}

#[test]
fn expand_pp_emits_pp6_document() {
    let (doc, code) = run(&["algebra", "expand-pp", "DM4"]);
    assert_eq!(code, 0);
    let expanded = ppcalc::FiniteAlgebra::from_json(&serde_json::from_str(&doc).unwrap()).unwrap();
    assert_eq!(expanded, ppcalc::algebra::builtin("PP6").unwrap());
}

#[test]
fn consequence_fails_with_countermodel() {
    let (out, code) = run(&["matrix", "consequence", "PP6:up_b", "--prem", "p,~p", "--conc", "q"]);
    assert!(out.starts_with("FAILS"), "{out}");
    assert!(out.contains("countermodel in <PP6, {b,t,T^}>"), "{out}");
    assert!(out.contains("designated"), "{out}");
    assert_eq!(code, 1);
    let (doc, _) = run_json(&["matrix", "consequence", "PP6:up_b", "--prem", "p,~p", "--conc", "q"]);
    assert_eq!(doc["verdict"], "fails");
    assert_eq!(doc["countermodel"]["premises"][0]["designated"], true);
    assert_eq!(doc["countermodel"]["conclusions"][0]["designated"], false);
}

#[test]
fn dat_agrees() {
    let (out, code) = run(&["matrix", "dat", "--prem", "p&~p", "--conc", "q"]);
    assert!(out.contains("AGREE"), "{out}");
    assert_eq!(code, 0);
}

#[test]
fn four_prime_filters() {
    let (doc, code) = run_json(&["matrix", "filters", "PP6", "--prime"]);
    assert_eq!(doc.as_array().unwrap().len(), 4);
    assert_eq!(code, 0);
    let (doc, _) = run_json(&["matrix", "filters", "PP6"]);
    assert_eq!(doc.as_array().unwrap().len(), 6);
}

#[test]
fn monadicity_verdicts() {
    assert_eq!(run(&["matrix", "monadic", "DM4:up_b", "--sep", "p,~p"]).1, 0);
    assert_eq!(run(&["matrix", "monadic", "PP6:up_b", "--sep", "p,*p,~p"]).1, 0);
    assert_eq!(run(&["matrix", "monadic", "PP6:up_b", "--sep", "p"]).1, 1);
}

#[test]
fn prove_closes() {
    let (out, code) = run(&["calculus", "prove", "RB+Rcirc", "--conc", "p,~p,~*p"]);
    assert!(out.starts_with("CLOSED"), "{out}");
    assert_eq!(code, 0);
}

#[test]
fn prove_open_extracts_countermodel() {
    let (doc, code) = run_json(&["calculus", "prove", "RB+Rcirc", "--conc", "p,~*p"]);
    assert_eq!(doc["verdict"], "open");
    assert_eq!(doc["countermodel"]["assignment"]["p"], "F^");
    assert_eq!(code, 1);
}

#[test]
fn soundness_of_rcirc() {
    let (out, code) = run(&["calculus", "soundness", "Rcirc", "PP6:up_b"]);
    assert!(out.starts_with("19/19 rules sound"), "{out}");
    assert_eq!(out.matches("  Sound ").count(), 19);
    assert_eq!(code, 0);
    let (out, code) = run(&["calculus", "soundness", "EM", "DM4:up_b"]);
    assert!(out.contains("UNSOUND"), "{out}");
    assert_eq!(code, 1);
}

#[test]
fn lift_writes_forty_rules() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("lifted.json");
    let (_, code) = run(&["calculus", "lift", "RB+Rcirc", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rules = doc["rules"].as_array().unwrap();
    assert_eq!(rules.len(), 40);
    let names: Vec<&str> = rules[..3].iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["Vintro", "Vcomm", "Vassoc"]);
}

#[test]
fn sfmla_prove_on_lifted_calculus() {
    let (out, code) = run(&["calculus", "sfmla-prove", "RB", "--lift", "--prem", "p & q", "--conc", "q"]);
    assert!(out.starts_with("DERIVED"), "{out}");
    assert_eq!(code, 0);
}

#[test]
fn errors_exit_two() {
    assert_eq!(run(&["algebra", "show", "NOPE"]).1, 2);
    assert_eq!(run(&["matrix", "consequence", "PP6:up_b", "--conc", "p &"]).1, 2);
    assert_eq!(run(&["algebra", "frobnicate"]).1, 2);
}

#[test]
fn output_is_deterministic() {
    let args = ["calculus", "prove", "RB+Rcirc", "--conc", "p,*p & ~p"];
    assert_eq!(run(&args), run(&args));
}
