use std::path::PathBuf;
use std::process::{Command, Output};

use cklef::commands::{self, IndexOptions};
use cklef::{parse_document, parse_kv};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cklef")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn main_path() -> String {
    data("main.ck").display().to_string()
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["validate", &main_path()]).status.code(), Some(0));
    let invalid = run(&["validate", data("invalid.ck").to_str().unwrap()]);
    assert_eq!(invalid.status.code(), Some(1));
    assert!(stdout(&invalid).starts_with("E: INVALID"));
    assert_eq!(run(&["index", data("invalid.ck").to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["lefschetz", &main_path(), "--k1-matrix=1,0;0,1"]).status.code(), Some(1));
    assert_eq!(run(&["lefschetz", &main_path(), "--k1-matrix=1"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "/nonexistent.ck"]).status.code(), Some(2));
    assert_eq!(run(&["index", &main_path(), "--method=bogus"]).status.code(), Some(2));
}

#[test]
fn parse_errors_report_positions() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(data("main.ck")).unwrap();
    for (from, to, expected) in [
        ("3,2 <- e", "1,4 <- e", "main.ck:13:3: letter 4 is not in the alphabet 1..=3"),
        ("3,2 <- e", "1,3 <- e", "main.ck:13:1: word 1,3 is not allowable"),
        ("A = 110 111 011", "A = 110 121 011", "main.ck:3:10: `2` is not 0 or 1"),
        ("[t3]", "[t3", "main.ck:15:1: malformed block header"),
    ] {
        let path = dir.path().join("main.ck");
        std::fs::write(&path, text.replace(from, to)).unwrap();
        let out = run(&["validate", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{to}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.trim_end().ends_with(expected), "{err}");
    }
}

#[test]
fn kv_output_matches_the_library_report() {
    let doc = parse_document(&std::fs::read_to_string(data("main.ck")).unwrap()).unwrap();
    let cases: Vec<(Vec<&str>, cklef::Report)> = vec![
        (vec!["index"], commands::index(&doc, None, &IndexOptions::default()).unwrap().report),
        (vec!["ktheory"], commands::ktheory(&doc).unwrap().report),
        (vec!["k0map"], commands::k0map(&doc, None).unwrap().report),
        (vec!["lefschetz", "--k1-matrix=0"], commands::lefschetz(&doc, None, Some("0")).unwrap().report),
        (vec!["zeta", "--terms", "6"], commands::zeta(&doc, None, 6, None).unwrap().report),
    ];
    for (args, report) in cases {
        let mut full = vec!["--format", "kv"];
        full.extend(&args);
        let path = main_path();
        full.push(&path);
        let out = stdout(&run(&full));
        assert_eq!(parse_kv(&out).unwrap(), report.entries(), "{args:?}");
    }
}

#[test]
fn stable_keys() {
    let out = stdout(&run(&["--format", "kv", "index", &main_path(), "--method=polynomial", "--m", "3", "--N", "1"]));
    let kv = parse_kv(&out).unwrap();
    let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    assert_eq!(get("command"), Some("index"));
    assert_eq!(get("status"), Some("ok"));
    assert_eq!(get("param.m"), Some("3"));
    assert_eq!(get("result.polynomial.positive"), Some("8"));
    assert_eq!(get("result.polynomial.negative"), Some("7"));
    assert_eq!(get("result.index"), Some("1"));
}

#[test]
fn output_is_deterministic() {
    for args in [vec!["index"], vec!["validate"], vec!["zeta"], vec!["lefschetz"]] {
        let mut full = args.clone();
        let path = main_path();
        full.push(&path);
        assert_eq!(run(&full).stdout, run(&full).stdout, "{args:?}");
    }
}

#[test]
fn golden_outputs() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden");
    for (name, args) in [
        ("validate", vec!["validate"]),
        ("index", vec!["index", "--method=all"]),
        ("ktheory", vec!["ktheory"]),
        ("k0map", vec!["k0map"]),
        ("lefschetz", vec!["lefschetz", "--k1-matrix=0"]),
        ("lefschetz_derived", vec!["lefschetz"]),
        ("zeta", vec!["zeta", "--k1-matrix=0"]),
        ("zeta_kv", vec!["--format", "kv", "zeta"]),
    ] {
        let mut full = args.clone();
        let path = main_path();
        full.push(&path);
        let expected = std::fs::read_to_string(golden.join(format!("{name}.txt"))).unwrap();
        assert_eq!(stdout(&run(&full)), expected, "{name}");
    }
}
