mod common;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use clap::CommandFactory;
use common::*;
use forkcore::cli::{Cli, OPERATIONS};
use forkcore::io::{parse_assignment, parse_profile, profile_to_string};
use serde_json::{json, Value};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_forkcore"));
    c.env_remove("FORKCORE_CAP");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_profile(dir: &Path, name: &str, p: &forkcore::Profile) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, profile_to_string(p)).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_and_unique_on_examples() {
    let dir = tempfile::tempdir().unwrap();
    let stable = write_profile(dir.path(), "stable.json", &stable_example());
    let nf = write_profile(dir.path(), "nf.json", &nonforking_example());
    for rule in ["RA", "RB"] {
        let v = stdout_json(&run(&["solve", "--input", s(&stable), "--rule", rule]));
        assert_eq!(
            v,
            json!({"placement": {"0": "A", "1": "B"}, "sizes": {"A": 1, "B": 1}})
        );
    }
    assert_eq!(
        stdout_json(&run(&["unique", "--input", s(&nf)])),
        json!({"unique": false})
    );
    assert_eq!(
        stdout_json(&run(&["unique", "--input", s(&stable)])),
        json!({"unique": true})
    );
}

#[test]
fn solve_writes_trace_and_out() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_profile(dir.path(), "mixed.json", &mixed_example());
    let out = dir.path().join("f.json");
    let trace = dir.path().join("trace.json");
    let o = run(&[
        "solve",
        "--input",
        s(&p),
        "--rule",
        "RB",
        "--out",
        s(&out),
        "--trace",
        s(&trace),
    ]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let f = parse_assignment(&mixed_example(), &fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(placement(&f), vec![0, 0]);
    let t: Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(t["iterations"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let o = run(&["solve", "--input", "/definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert!(o.stdout.is_empty());

    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(
        run(&["solve", "--input", "x", "--rule", "RC"])
            .status
            .code(),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(
        &bad,
        r#"{"n":2,"alternatives":["A","B"],"agents":[{"id":0,"ranking":[["A",1],["A",2],["B",2],["B",1]]},{"id":1,"threshold":{"preferred":"B","j":1}}]}"#,
    )
    .unwrap();
    let o = run(&["solve", "--input", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("agent 0"));

    let p = write_profile(
        dir.path(),
        "w.json",
        &forkcore::multiway::no_stable_witness(),
    );
    assert_eq!(run(&["solve", "--input", s(&p)]).status.code(), Some(1));
    assert_eq!(
        run(&["stable-enum", "--input", s(&p), "--max-size", "10"])
            .status
            .code(),
        Some(2)
    );
    let o = bin()
        .args(["stable-enum", "--input", s(&p)])
        .env("FORKCORE_CAP", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = bin()
        .args(["stable-enum", "--input", s(&p)])
        .env("FORKCORE_CAP", "27")
        .output()
        .unwrap();
    assert_eq!(stdout_json(&o)["count"], json!(0));
}

#[test]
fn version_and_help() {
    let o = run(&["--version"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("forkcore "));
    let help = String::from_utf8(run(&["--help"]).stdout).unwrap();
    for sub in Cli::command().get_subcommands() {
        assert!(help.contains(sub.get_name()));
    }
}

#[test]
fn round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let gen = run(&[
        "generate",
        "--n",
        "5",
        "--class",
        "k-interleaving:3",
        "--seed",
        "42",
    ]);
    assert!(gen.status.success());
    let text = String::from_utf8(gen.stdout).unwrap();
    let p = parse_profile(&text).unwrap();
    assert_eq!(profile_to_string(&p), text);
    let path = dir.path().join("p.json");
    fs::write(&path, &text).unwrap();

    let enumerated = stdout_json(&run(&["stable-enum", "--input", s(&path)]));
    let count = enumerated["count"].as_u64().unwrap() as usize;
    assert_eq!(enumerated["assignments"].as_array().unwrap().len(), count);
    for (i, doc) in enumerated["assignments"]
        .as_array()
        .unwrap()
        .iter()
        .enumerate()
    {
        let f = parse_assignment(&p, &doc.to_string()).unwrap();
        let fpath = dir.path().join(format!("f{i}.json"));
        fs::write(&fpath, forkcore::io::assignment_to_string(&p, &f)).unwrap();
        let check = stdout_json(&run(&[
            "check",
            "--input",
            s(&path),
            "--assignment",
            s(&fpath),
        ]));
        assert_eq!(check, json!({"stable": true, "witness": null}));
    }

    let solved = run(&["solve", "--input", s(&path)]);
    let f = parse_assignment(&p, &String::from_utf8(solved.stdout).unwrap()).unwrap();
    assert_eq!(f, forkcore::solver::run_ra(&p).unwrap().0);

    let w = dir.path().join("w.json");
    assert!(run(&["witness-no-stable", "--out", s(&w)]).status.success());
    let wp = parse_profile(&fs::read_to_string(&w).unwrap()).unwrap();
    assert_eq!(wp, forkcore::multiway::no_stable_witness());
    assert_eq!(
        stdout_json(&run(&["solve-multi", "--input", s(&w)])),
        Value::Null
    );
}

#[test]
fn check_reports_fork_witness() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_profile(dir.path(), "nf.json", &nonforking_example());
    let f = dir.path().join("f.json");
    fs::write(&f, r#"{"placement": {"0": "A", "1": "B"}}"#).unwrap();
    let v = stdout_json(&run(&["check", "--input", s(&p), "--assignment", s(&f)]));
    assert_eq!(
        v,
        json!({"stable": false, "witness": {"target": "A", "target_size": 2, "movers": [1]}})
    );
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    fs::create_dir(&corpus).unwrap();
    for seed in 0..6u64 {
        let n = (1 + seed % 4).to_string();
        let out = corpus.join(format!("p{seed}.json"));
        let seed = seed.to_string();
        assert!(
            run(&["generate", "--n", &n, "--seed", &seed, "--out", s(&out)])
                .status
                .success()
        );
    }
    let p = corpus.join("p3.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["generate", "--n", "6", "--class", "nci", "--seed", "7"],
        vec!["classify", "--input", s(&p)],
        vec!["stable-enum", "--input", s(&p)],
        vec!["manipulate", "--input", s(&p), "--max-coalition", "4"],
        vec!["elicit", "--input", s(&p)],
        vec!["audit", "--corpus", s(&corpus), "--threads", "3"],
    ];
    for args in commands {
        let first = run(&args);
        assert!(first.status.success(), "{args:?}");
        assert_eq!(first.stdout, run(&args).stdout, "{args:?}");
    }
}

#[test]
fn manipulate_nonforking() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_profile(dir.path(), "nf.json", &nonforking_example());
    for extra in [None, Some("--exhaustive")] {
        let mut args = vec!["manipulate", "--input", s(&p), "--rule", "RA"];
        args.extend(extra);
        let v = stdout_json(&run(&args));
        assert_eq!(v["manipulable"], json!(true));
        assert_eq!(v["report"]["coalition"], json!([1]));
        assert_eq!(
            v["report"]["manipulated_outcome"]["placement"],
            json!({"0": "B", "1": "B"})
        );
    }
}

#[test]
fn audit_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c");
    fs::create_dir(&corpus).unwrap();
    write_profile(&corpus, "b-nonforking.json", &nonforking_example());
    write_profile(&corpus, "a-stable.json", &stable_example());
    fs::write(corpus.join("notes.txt"), "ignored").unwrap();
    let csv = dir.path().join("audit.csv");
    let v = stdout_json(&run(&["audit", "--corpus", s(&corpus), "--csv", s(&csv)]));
    assert_eq!(v["profiles"][0]["id"], json!("a-stable"));
    assert_eq!(v["crosstab"]["multiple_manipulable"], json!(1));
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "profile_id,n,stable_count,unique,manipulable,witness_coalition_size\n\
         a-stable,2,1,true,false,\n\
         b-nonforking,2,2,false,true,1\n"
    );
}

#[test]
fn classify_reports_cohesion() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_profile(dir.path(), "nf.json", &nonforking_example());
    let v = stdout_json(&run(&["classify", "--input", s(&p)]));
    assert_eq!(v["profile"]["class"], json!("minimally-interleaving"));
    assert_eq!(
        v["cohesive"],
        json!({"cohesive": true, "witness": "A", "alternatives": ["A", "B"]})
    );
    assert_eq!(v["uniqueness"]["coalition_condition"], json!(null));
    assert_eq!(v["agents"][0]["loyalty"], json!(2));
}

#[test]
fn elicit_simulated_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_profile(dir.path(), "stable.json", &stable_example());
    let out = dir.path().join("e.json");
    let o = run(&["elicit", "--input", s(&p), "--out", s(&out)]);
    assert!(o.status.success());
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "Q agent=0 a=2 b=0\nnone\nQ agent=1 a=2 b=0\n1\nQ agent=0 a=1 b=1\nnone\n"
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["assignment"]["placement"], json!({"0": "A", "1": "B"}));
    assert_eq!(v["stats"]["rounds"], json!(2));
    assert_eq!(v["stats"]["total_queries"], json!(3));

    let o = run(&["elicit", "--input", s(&p), "--nci"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("Q agent=0 top\nA\nQ agent=0 loyalty\n1\n"));
}

fn interactive(args: &[&str], script: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(script.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn elicit_interactive_pipe() {
    let o = interactive(&["elicit", "--interactive", "--n", "2"], "none\n1\nnone\n");
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let (transcript, json_part) = text.split_at(text.find('{').unwrap());
    assert_eq!(
        transcript,
        "Q agent=0 a=2 b=0\nQ agent=1 a=2 b=0\nQ agent=0 a=1 b=1\n"
    );
    let v: Value = serde_json::from_str(json_part).unwrap();
    assert_eq!(v["assignment"]["placement"], json!({"0": "A", "1": "B"}));

    let o = interactive(
        &["elicit", "--interactive", "--n", "2"],
        "what\n0\n3\nmaybe\n",
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap().matches("! ").count(),
        3
    );

    let o = interactive(
        &["elicit", "--interactive", "--n", "2", "--nci"],
        "B\n1\nA\n1\n",
    );
    let text = String::from_utf8(o.stdout).unwrap();
    let v: Value = serde_json::from_str(&text[text.find('{').unwrap()..]).unwrap();
    assert_eq!(v["assignment"]["placement"], json!({"0": "B", "1": "A"}));
    assert_eq!(v["stats"]["total_queries"], json!(4));

    assert_eq!(run(&["elicit", "--interactive"]).status.code(), Some(2));
    assert_eq!(run(&["elicit"]).status.code(), Some(1));
}

#[test]
fn dispatch_table_covers_every_operation_once() {
    let subcommands: BTreeSet<String> = Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect();
    let expected: BTreeSet<String> = [
        "solve",
        "solve-multi",
        "check",
        "stable-enum",
        "unique",
        "elicit",
        "classify",
        "generate",
        "manipulate",
        "audit",
        "witness-no-stable",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    assert_eq!(subcommands, expected);

    let mut seen = BTreeSet::new();
    for (sub, op) in OPERATIONS {
        assert!(subcommands.contains(*sub), "{sub} is not a subcommand");
        assert!(seen.insert(*op), "{op} is routed twice");
    }
    let used: BTreeSet<String> = OPERATIONS.iter().map(|(sub, _)| sub.to_string()).collect();
    assert_eq!(used, subcommands);

    let library = [
        "model::validate_order",
        "model::prefers",
        "model::induced_preference_over_assignments",
        "model::enumerate_monotone_orders",
        "model::expand_threshold",
        "solver::run_ra",
        "solver::run_rb",
        "solver::is_unique_stable",
        "elicitation::run_elicited",
        "elicitation::run_elicited_nci",
        "elicitation::truthful_oracles",
        "domains::classify_order",
        "domains::is_cohesive",
        "domains::loyalty_vector",
        "domains::check_loyalty_uniqueness",
        "domains::check_coalition_uniqueness",
        "domains::generate",
        "exhaustive::enumerate_stable",
        "exhaustive::find_manipulation",
        "exhaustive::audit_strategyproofness",
        "multiway::is_stable",
        "multiway::find_stable_exhaustive",
        "multiway::no_stable_witness",
    ];
    assert_eq!(seen, library.into_iter().collect());
}
