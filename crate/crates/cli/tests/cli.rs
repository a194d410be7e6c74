use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use wo_core::sp::SPWord;
use wo_core::trs::Trs;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    dir().join("fixtures").join(name).display().to_string()
}

fn wo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wo"))
        .args(args)
        .env("WO_COLOR", "0")
        .output()
        .expect("run wo")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(dir().join("schema/report.schema.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&v).expect("schema compiles")
}

fn json_report(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--format", "json"];
    full.extend_from_slice(args);
    let o = wo(&full);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}", stdout(&o)));
    let s = schema();
    if let Err(errs) = s.validate(&v) {
        let msgs: Vec<String> = errs.map(|e| e.to_string()).collect();
        panic!("{args:?} violates the schema: {msgs:?}\n{v}");
    }
    assert_eq!(v["exit"].as_i64().unwrap() as i32, code(&o));
    (v, code(&o))
}

/// Rough well-formedness: header, balanced braces outside quotes, and
/// every statement line terminated.
fn assert_dot(s: &str) {
    assert!(s.starts_with("digraph ") || s.starts_with("graph "), "{s}");
    let (mut depth, mut in_str, mut esc) = (0i32, false, false);
    for c in s.chars() {
        match (in_str, esc, c) {
            (true, true, _) => esc = false,
            (true, false, '\\') => esc = true,
            (_, false, '"') => in_str = !in_str,
            (false, _, '{') => depth += 1,
            (false, _, '}') => depth -= 1,
            _ => {}
        }
        assert!(depth >= 0);
    }
    assert_eq!(depth, 0);
    assert!(!in_str);
    for line in s.lines().map(str::trim) {
        assert!(line.ends_with(';') || line.ends_with('{') || line == "}", "unterminated: {line}");
    }
}

#[test]
fn check_verdicts_and_exit_codes() {
    let o = wo(&["check", &fixture("sp.trs")]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("weakly orthogonal: yes; collapsing rules: PS, SP"));
    let o = wo(&["check", &fixture("sp_e.trs")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("<e(P(x)), P(e(x))>"));
}

#[test]
fn parse_errors_carry_positions() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.trs");
    std::fs::write(&path, "sig f/1\nrule R : f(x) -> g(x)\n").unwrap();
    let o = wo(&["check", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("2:"), "{err}");
    assert_eq!(code(&wo(&["frobnicate"])), 2);
    assert_eq!(code(&wo(&["check", "/nonexistent.trs"])), 2);
}

#[test]
fn every_verb_emits_schema_valid_json() {
    let sp = fixture("sp.trs");
    let or = fixture("or.trs");
    let stream = fixture("stream.trs");
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["check".into(), sp.clone()], 0),
        (vec!["check".into(), fixture("sp_e.trs")], 1),
        (vec!["cps".into(), sp.clone()], 0),
        (vec!["redexes".into(), fixture("swap.trs"), "--term".into(), "f(g(a,a))".into()], 0),
        (
            vec![
                "orthogonalize".into(),
                fixture("a3.trs"),
                "--term".into(),
                "rec X = A(rec Y = A(rec Z = A(X)))".into(),
                "--left".into(),
                "{node X : AAA}".into(),
                "--right".into(),
                "{node Y : AAA}".into(),
                "--depth".into(),
                "6".into(),
            ],
            3,
        ),
        (vec!["develop".into(), sp.clone(), "--term".into(), "S(P(S(P(x))))".into(), "--set".into(), "{ε:SP, 1.1:SP}".into()], 0),
        (
            vec!["project".into(), sp.clone(), "--term".into(), "S(P(S(P(x))))".into(), "--left".into(), "{ε:SP}".into(), "--right".into(), "{1:PS}".into()],
            0,
        ),
        (
            vec!["strip".into(), or.clone(), "--seq".into(), fixture("strip.seq"), "--step".into(), "{ε:R}".into(), "--depth".into(), "4".into()],
            0,
        ),
        (
            vec!["join".into(), or.clone(), "--left".into(), fixture("join_left.seq"), "--right".into(), fixture("join_right.seq"), "--depth".into(), "4".into()],
            0,
        ),
        (
            vec![
                "diamond".into(),
                fixture("collapse.trs"),
                "--term".into(),
                "rec X = f(f(X,b),a)".into(),
            ],
            2,
        ),
        (
            vec![
                "cube".into(),
                sp.clone(),
                "--term".into(),
                "S(P(S(P(x))))".into(),
                "--alpha".into(),
                "{ε:SP}".into(),
                "--beta".into(),
                "{1:PS}".into(),
                "--gamma".into(),
                "{1.1:SP}".into(),
            ],
            1,
        ),
        (vec!["compress".into(), stream.clone(), "--seq".into(), fixture("omega_plus_one.seq")], 0),
        (vec!["compress".into(), stream, "--seq".into(), fixture("divergent.seq"), "--prefix".into(), "30".into()], 0),
        (vec!["sp".into(), "classify".into(), "q".into()], 0),
        (vec!["sp".into(), "graph".into(), "r".into(), "--length".into(), "8".into()], 0),
        (vec!["sp".into(), "witness".into(), "q".into(), "--target".into(), "S".into(), "--depth".into(), "4".into()], 0),
        (vec!["sp".into(), "witness".into(), "ep::SP".into(), "--target".into(), "S".into(), "--depth".into(), "2".into()], 2),
    ];
    for (args, expected) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, c) = json_report(&refs);
        assert_eq!(c, expected, "{args:?}");
    }
}

#[test]
fn diamond_refuses_collapsing_with_note() {
    let o = wo(&[
        "diamond",
        &fixture("collapse.trs"),
        "--term",
        "rec X = f(f(X,b),a)",
        "--witness",
        "rec Y = f(Y,a)",
        "rec Z = f(Z,b)",
    ]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("collapsing rules present"), "{err}");
    assert!(err.contains("no common reduct within 3 steps"), "{err}");
}

#[test]
fn dot_outputs_are_well_formed() {
    let sp = fixture("sp.trs");
    let runs: Vec<Vec<&str>> = vec![
        vec!["redexes", &sp, "--term", "S(P(S(P(x))))"],
        vec!["project", &sp, "--term", "S(P(S(P(x))))", "--left", "{ε:SP}", "--right", "{1:PS}"],
    ];
    for args in runs {
        let mut full = vec!["--format", "dot"];
        full.extend(args);
        let o = wo(&full);
        assert_eq!(code(&o), 0);
        assert_dot(&stdout(&o));
    }
    let or = fixture("or.trs");
    for args in [
        vec!["strip", or.as_str(), "--seq", &fixture("strip.seq"), "--step", "{ε:R}", "--depth", "4"],
        vec!["join", or.as_str(), "--left", &fixture("join_c_left.seq"), "--right", &fixture("join_c_right.seq"), "--depth", "4"],
    ] {
        let mut full = vec!["--format", "dot"];
        full.extend(args.iter().map(|s| &**s));
        let o = wo(&full);
        assert_eq!(code(&o), 0);
        assert_dot(&stdout(&o));
    }
}

#[test]
fn csv_graph() {
    let o = wo(&["sp", "graph", "q", "--length", "6", "--csv"]);
    assert_eq!(stdout(&o), "n,sum\n0,0\n1,1\n2,0\n3,-1\n4,0\n5,1\n6,2\n");
    let o = wo(&["--format", "csv", "check", &fixture("sp.trs")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn outputs_are_byte_stable() {
    let args = ["--format", "json", "compress", &fixture("stream.trs"), "--seq", &fixture("omega_plus_two.seq")];
    let args: Vec<&str> = args.iter().map(|s| &**s).collect();
    assert_eq!(wo(&args).stdout, wo(&args).stdout);
}

#[test]
fn emitted_literals_reparse() {
    let (v, _) = json_report(&["sp", "classify", "r"]);
    let w = SPWord::parse(v["word"].as_str().unwrap()).unwrap();
    assert_eq!(w.prefix(30), wo_core::sp::make_r().prefix(30));
    let or = Trs::parse(&std::fs::read_to_string(fixture("or.trs")).unwrap()).unwrap();
    let (v, _) = json_report(&[
        "join",
        &fixture("or.trs"),
        "--left",
        &fixture("join_left.seq"),
        "--right",
        &fixture("join_right.seq"),
        "--depth",
        "4",
    ]);
    let u = or.parse_term(v["u"].as_str().unwrap()).unwrap();
    let expected = or.parse_term("p(rec X = or(true,X), rec Y = or(true,Y))").unwrap();
    assert!(u.eq_to_depth(&expected, 4), "{u}");
    let (v, _) = json_report(&["develop", &fixture("sp.trs"), "--term", "S(P(S(P(x))))", "--set", "{ε:SP}"]);
    let sp = Trs::parse(&std::fs::read_to_string(fixture("sp.trs")).unwrap()).unwrap();
    assert!(sp.parse_term(v["target"].as_str().unwrap()).unwrap().eq_rational(&sp.parse_term("S(P(x))").unwrap()));
}

#[test]
fn colour_is_opt_in() {
    let o = Command::new(env!("CARGO_BIN_EXE_wo"))
        .args(["check", &fixture("sp.trs")])
        .env("WO_COLOR", "1")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("\x1b[32myes"));
    assert!(!stdout(&wo(&["check", &fixture("sp.trs")])).contains('\x1b'));
}
