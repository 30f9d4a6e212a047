use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tapescan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tapescan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    tapescan(args).status.code().expect("exit code")
}

fn stdout(args: &[&str]) -> String {
    let out = tapescan(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn meta(path: &Path) -> Value {
    let mut p = path.as_os_str().to_owned();
    p.push(".meta.json");
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_examples() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.xml");
    stdout(&["gen", "sets-tree", "--n", "3", "--x", "1,3", "--y", "2", "--out", s(&tree)]);
    let m = meta(&tree);
    assert_eq!(m["length"], 31);
    assert_eq!(m["verdict"], false);
    assert_eq!(stdout(&["gen", "chase", "--m", "2", "--table", "10,11,01,00"]).trim(), "11#10110100");

    let disj = dir.path().join("d.txt");
    stdout(&["gen", "disj", "--n", "8", "--x", "10110000", "--y", "01000001", "--out", s(&disj)]);
    assert_eq!(fs::read_to_string(&disj).unwrap().trim(), "10110000#01000001");
    let m = meta(&disj);
    assert_eq!(m["length"], 17);
    assert_eq!(m["verdict"], true);
}

#[test]
fn exit_code_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let member = write("member.txt", "10110000#01000000");
    let shared = write("shared.txt", "10110000#00100000");
    let ragged = write("ragged.txt", "101#01");
    let chase = write("chase.txt", "11#10110100");
    let records = write("recs.txt", "11,1;0,0;10,1;");
    let broken = write("broken.txt", "11,1;0,");
    let relpair = write("rel.xml", "<rels><rel1></rel1><rel2></rel2></rels>");
    let missing = dir.path().join("absent.txt");

    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["run", "--algo", "disj-chunked", "--input", s(&member)], 0),
        (vec!["run", "--algo", "disj-trivial", "--input", s(&shared)], 1),
        (vec!["run", "--algo", "disj-chunked", "--input", s(&member), "--budget", "r=1,s=n"], 2),
        (vec!["run", "--algo", "disj-trivial", "--input", s(&ragged)], 3),
        (vec!["run", "--algo", "disj-trivial", "--input", s(&missing)], 3),
        (vec!["run", "--algo", "nope", "--input", s(&member)], 3),
        (vec!["run", "--algo", "disj-trivial", "--input", s(&member), "--budget", "r=n-1,s=1"], 3),
        (vec!["run", "--algo", "chase", "--param", "1", "--input", s(&chase)], 0),
        (vec!["run", "--algo", "chase-cert", "--param", "1", "--cert", "2,1", "--input", s(&chase)], 0),
        (vec!["run", "--algo", "chase-cert", "--param", "1", "--cert", "0,1", "--input", s(&chase)], 1),
        (vec!["run", "--algo", "chase-cert", "--param", "1", "--input", s(&chase)], 3),
        (vec!["run", "--algo", "chase", "--input", s(&member)], 3),
        (vec!["run", "--algo", "keysort", "--param", "2", "--input", s(&records)], 0),
        (vec!["run", "--algo", "keysort", "--input", s(&broken)], 3),
        (vec!["run", "--algo", "load-solve", "--input", s(&relpair)], 0),
        (vec!["run", "--algo", "load-solve", "--input", s(&member)], 3),
        (vec!["sweep", "--family", "disj-trivial", "--sizes", "4"], 3),
        (vec!["sweep", "--family", "bogus", "--sizes", "4", "--seed", "1"], 3),
        (vec!["xpath", "--query", "child::", "--mode", "eval", "--doc", s(&relpair)], 3),
        (vec!["xpath", "--query", "parent::a", "--mode", "compile"], 3),
        (vec!["gen", "disj", "--n", "4"], 3),
    ];
    for (args, expected) in cases {
        assert_eq!(code(&args), expected, "{args:?}");
    }
}

#[test]
fn sort_and_join_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("r.txt");
    fs::write(&recs, "11,1;0,0;10,1;0,11;").unwrap();
    assert_eq!(stdout(&["sort", "--input", s(&recs), "--b", "2"]), "0,0\n0,3\n2,1\n3,1\n");

    let rel = dir.path().join("rel.xml");
    stdout(&["gen", "relpair", "--n", "3", "--x", "110", "--y", "011", "--out", s(&rel)]);
    assert_eq!(meta(&rel)["verdict"], false);
    let joined = stdout(&["join", "--input", s(&rel), "--b", "2"]);
    assert!(!joined.trim().is_empty());
    let flat = dir.path().join("rel.txt");
    stdout(&["gen", "relpair", "--n", "3", "--x", "110", "--y", "011", "--format", "flat", "--out", s(&flat)]);
    assert_eq!(stdout(&["join", "--input", s(&flat), "--b", "2"]), joined);
}

#[test]
fn xpath_modes_agree() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("d.xml");
    fs::write(&doc, "<a><b><c/></b><c/><b/></a>").unwrap();
    let d = s(&doc);
    let q = "/descendant::b";
    let eval = stdout(&["xpath", "--query", q, "--mode", "eval", "--doc", d]);
    assert_eq!(eval, "2\n5\n");
    assert_eq!(stdout(&["xpath", "--query", q, "--mode", "select-asc", "--doc", d]), eval);
    assert_eq!(stdout(&["xpath", "--query", q, "--mode", "select-desc", "--doc", d]), "5\n2\n");
    assert_eq!(stdout(&["xpath", "--query", q, "--mode", "filter-stream", "--doc", d]), "true\n");
    let compiled = stdout(&["xpath", "--query", q, "--mode", "compile", "--selector"]);
    assert!(compiled.contains("topdown-init:"));
}

#[test]
fn protocol_replays() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.txt");
    stdout(&["gen", "disj", "--n", "16", "--seed", "5", "--out", s(&input)]);
    let summary: Value = serde_json::from_str(&stdout(&["protocol", "--algo", "disj-chunked", "--input", s(&input)])).unwrap();
    assert_eq!(summary["boundary"], 17);
    assert_eq!(summary["replay"], true);
    assert!(summary["messages"].as_u64().unwrap() <= summary["r_used"].as_u64().unwrap());
    assert!(summary["total_bits"].as_u64().unwrap() <= summary["bound_bits"].as_u64().unwrap());
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run_all = |tag: &str| {
        let out = dir.path().join(format!("inst-{tag}.xml"));
        let report = dir.path().join(format!("rep-{tag}.json"));
        stdout(&["gen", "sets-tree", "--n", "6", "--seed", "42", "--out", s(&out)]);
        let sweep = stdout(&["sweep", "--family", "disj-chunked", "--sizes", "16,64", "--count", "5", "--seed", "9"]);
        let chase = dir.path().join(format!("chase-{tag}.txt"));
        stdout(&["gen", "chase", "--m", "3", "--seed", "42", "--out", s(&chase)]);
        code(&["run", "--algo", "chase", "--param", "2", "--input", s(&chase), "--report", s(&report)]);
        (
            fs::read(&out).unwrap(),
            fs::read(&chase).unwrap(),
            fs::read(&report).unwrap(),
            sweep,
        )
    };
    assert_eq!(run_all("a"), run_all("b"));
}

#[test]
fn chase_sweep_reversals_equal_depth() {
    for k in 1..=3 {
        let csv = stdout(&["sweep", "--family", "chase", "--param", &k.to_string(), "--sizes", "4", "--count", "20", "--seed", "3"]);
        let max_rev = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(3).unwrap().parse::<usize>().unwrap())
            .max()
            .unwrap();
        assert_eq!(max_rev, k, "k={k}");
    }
}
