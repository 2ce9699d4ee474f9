use std::path::{Path, PathBuf};

use proofchain_cli::{run, EXIT_FALSE, EXIT_OK, EXIT_USAGE};
use proofchain_core::canonical;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Out {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("proofchain").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

#[track_caller]
fn expect(args: &[&str], code: i32) -> Out {
    let o = cli(args);
    assert_eq!(o.code, code, "{args:?}\nstdout: {}\nstderr: {}", o.stdout, o.stderr);
    o
}

struct Ws {
    dir: TempDir,
}

impl Ws {
    fn new() -> Self {
        Ws { dir: TempDir::new().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write_json(&self, name: &str, v: &Value) -> String {
        std::fs::write(self.path(name), serde_json::to_vec(v).unwrap()).unwrap();
        self.p(name)
    }

    /// Ledger plus openings for three payroll records.
    fn committed(&self) -> (String, String) {
        let ledger = self.p("ledger.jsonl");
        expect(&["ledger", "init", "--ledger", &ledger], EXIT_OK);
        let records = self.write_json(
            "records.json",
            &json!([
                {"record_id": "alice", "fields": {"salary": {"int": "1388"}, "team": {"text": "infra"}}},
                {"record_id": "bob", "fields": {"salary": {"int": "fa0"}, "team": {"text": "web"}}},
                {"record_id": "carol", "fields": {"salary": {"int": "7d0"}, "team": {"text": "infra"}}},
            ]),
        );
        let openings = self.p("openings.json");
        expect(
            &["--seed", "0a0b", "commit", "--ledger", &ledger, "--records", &records, "--owner", "hr", "--label", "payroll/2026-09", "--out", &openings],
            EXIT_OK,
        );
        (ledger, openings)
    }
}

fn height(ledger: &str) -> usize {
    std::fs::read_to_string(ledger).unwrap().lines().count()
}

#[test]
fn help_lists_every_subcommand() {
    let o = expect(&["--help"], EXIT_OK);
    for sub in ["ledger", "commit", "prove", "verify", "chain", "scenario"] {
        assert!(o.stdout.contains(sub), "{sub} missing from help");
    }
    for (group, subs) in [
        ("ledger", &["init", "append", "export", "import", "audit"][..]),
        ("prove", &["reveal", "geq", "sum"][..]),
        ("chain", &["build", "verify", "lint"][..]),
        ("scenario", &["run"][..]),
    ] {
        let o = expect(&[group, "--help"], EXIT_OK);
        for sub in subs {
            assert!(o.stdout.contains(sub), "{group} {sub} missing from help");
        }
    }
}

#[test]
fn usage_errors_exit_two() {
    let o = expect(&["verify", "--no-such-flag"], EXIT_USAGE);
    assert!(o.stderr.contains("Usage"));
    expect(&[], EXIT_USAGE);
    expect(&["ledger"], EXIT_USAGE);
    expect(&["ledger", "audit"], EXIT_USAGE);
    expect(&["--profile", "huge", "ledger", "audit", "--ledger", "x"], EXIT_USAGE);
    expect(&["--seed", "xyz", "scenario", "run", "audit", "--out", "t.json"], EXIT_USAGE);
    expect(&["scenario", "run", "payroll", "--out", "t.json"], EXIT_USAGE);
    expect(&["ledger", "audit", "--ledger", "/nonexistent/ledger.jsonl"], EXIT_USAGE);
}

#[test]
fn ledger_lifecycle() {
    let ws = Ws::new();
    let ledger = ws.p("l.jsonl");
    expect(&["ledger", "init", "--ledger", &ledger], EXIT_OK);
    expect(&["ledger", "init", "--ledger", &ledger], EXIT_USAGE);
    expect(&["ledger", "init", "--ledger", &ledger, "--force"], EXIT_OK);

    let digest = "ab".repeat(32);
    expect(&["ledger", "append", "--ledger", &ledger, "--author", "a", "--label", "x", "--digest", &digest], EXIT_OK);
    expect(&["ledger", "append", "--ledger", &ledger, "--author", "a", "--label", "x", "--digest", "abc"], EXIT_USAGE);
    std::fs::write(ws.path("doc.txt"), b"hello").unwrap();
    expect(&["ledger", "append", "--ledger", &ledger, "--author", "a", "--label", "y", "--file", &ws.p("doc.txt")], EXIT_OK);
    // timestamps may not go backwards
    expect(&["ledger", "append", "--ledger", &ledger, "--author", "a", "--label", "z", "--digest", &digest, "--time", "0"], EXIT_USAGE);
    assert_eq!(height(&ledger), 3);
    expect(&["ledger", "audit", "--ledger", &ledger], EXIT_OK);

    let exported = expect(&["ledger", "export", "--ledger", &ledger], EXIT_OK).stdout;
    assert_eq!(exported, std::fs::read_to_string(&ledger).unwrap());
    let copy = ws.p("copy.jsonl");
    expect(&["ledger", "export", "--ledger", &ledger, "--out", &copy], EXIT_OK);
    let imported = ws.p("imported.jsonl");
    expect(&["ledger", "import", "--from", &copy, "--ledger", &imported], EXIT_OK);
    assert_eq!(std::fs::read_to_string(&imported).unwrap(), exported);

    // flip one character of the anchored digest in the last block
    let tampered = exported.replacen(&digest, &format!("ac{}", &digest[2..]), 1);
    assert_ne!(tampered, exported);
    std::fs::write(ws.path("bad.jsonl"), &tampered).unwrap();
    let target = ws.p("never.jsonl");
    expect(&["ledger", "import", "--from", &ws.p("bad.jsonl"), "--ledger", &target], EXIT_FALSE);
    assert!(!Path::new(&target).exists());
    expect(&["ledger", "audit", "--ledger", &ws.p("bad.jsonl")], EXIT_FALSE);

    std::fs::write(ws.path("garbage.jsonl"), "not json\n").unwrap();
    expect(&["ledger", "audit", "--ledger", &ws.p("garbage.jsonl")], EXIT_USAGE);
}

#[test]
fn prove_and_verify_matrix() {
    let ws = Ws::new();
    let (ledger, openings) = ws.committed();

    let reveal = ws.p("reveal.zkb");
    expect(&["prove", "reveal", "--openings", &openings, "--record", "bob", "--field", "team", "--out", &reveal], EXIT_OK);
    expect(&["verify", "-f", &reveal, "--ledger", &ledger], EXIT_OK);

    let mut bundle: Value = serde_json::from_slice(&std::fs::read(&reveal).unwrap()).unwrap();
    bundle["statement"]["outputs"]["value"]["text"] = json!("infra");
    let forged = ws.write_json("forged.zkb", &bundle);
    let o = expect(&["--json", "verify", "-f", &forged, "--ledger", &ledger], EXIT_FALSE);
    let v: Value = serde_json::from_str(o.stdout.trim()).unwrap();
    assert_eq!(v["verdict"], json!(false));

    let not_bundle = ws.write_json("other.zkb", &json!({"hello": "world"}));
    expect(&["verify", "-f", &not_bundle, "--ledger", &ledger], EXIT_FALSE);
    std::fs::write(ws.path("broken.zkb"), b"{").unwrap();
    expect(&["verify", "-f", &ws.p("broken.zkb"), "--ledger", &ledger], EXIT_USAGE);
    expect(&["verify", "-f", &ws.p("missing.zkb"), "--ledger", &ledger], EXIT_USAGE);

    // salaries are 5000, 4000 and 2000
    let geq = ws.p("geq.zkb");
    expect(&["--seed", "01", "prove", "geq", "--openings", &openings, "--record", "alice", "--field", "salary", "--threshold", "4500", "--bits", "16", "--out", &geq], EXIT_OK);
    expect(&["verify", "-f", &geq, "--ledger", &ledger], EXIT_OK);
    let o = expect(&["--seed", "01", "prove", "geq", "--openings", &openings, "--record", "carol", "--field", "salary", "--threshold", "4500", "--bits", "16", "--out", &ws.p("no.zkb")], EXIT_FALSE);
    assert!(o.stderr.contains("refused"));
    assert!(!ws.path("no.zkb").exists());
    expect(&["prove", "geq", "--openings", &openings, "--record", "carol", "--field", "team", "--threshold", "1", "--out", &ws.p("x.zkb")], EXIT_USAGE);

    let sum = ws.p("sum.zkb");
    expect(&["prove", "sum", "--openings", &openings, "--records", "alice,bob,carol", "--field", "salary", "--total", "11000", "--out", &sum], EXIT_OK);
    expect(&["verify", "-f", &sum, "--ledger", &ledger], EXIT_OK);
    let wrong = ws.p("wrong.zkb");
    expect(&["prove", "sum", "--openings", &openings, "--records", "alice,bob,carol", "--field", "salary", "--total", "11001", "--out", &wrong], EXIT_OK);
    expect(&["verify", "-f", &wrong, "--ledger", &ledger], EXIT_FALSE);

    let before = height(&ledger);
    expect(&["verify", "-f", &sum, "--ledger", &ledger, "--record"], EXIT_OK);
    expect(&["verify", "-f", &wrong, "--ledger", &ledger, "--record"], EXIT_FALSE);
    assert_eq!(height(&ledger), before + 2);
    expect(&["ledger", "audit", "--ledger", &ledger], EXIT_OK);
}

#[test]
fn missing_seed_is_drawn_and_reported() {
    let ws = Ws::new();
    let (_, openings) = ws.committed();
    let o = expect(
        &["prove", "geq", "--openings", &openings, "--record", "bob", "--field", "salary", "--threshold", "10", "--bits", "16", "--out", &ws.p("g.zkb")],
        EXIT_OK,
    );
    let line = o.stderr.lines().find(|l| l.starts_with("seed: ")).expect("seed printed");
    assert_eq!(line.len(), "seed: ".len() + 32);
}

#[test]
fn chain_commands_over_a_scenario() {
    let ws = Ws::new();
    let (transcript, ledger, graph) = (ws.p("t.json"), ws.p("l.jsonl"), ws.p("g.json"));
    expect(
        &["--seed", "c0ffee", "scenario", "run", "identity", "--out", &transcript, "--ledger-out", &ledger, "--graph-out", &graph],
        EXIT_OK,
    );
    expect(&["chain", "build", "-f", &graph, "--out", &ws.p("g2.json")], EXIT_OK);
    assert_eq!(std::fs::read(&graph).unwrap(), std::fs::read(ws.path("g2.json")).unwrap());
    expect(&["chain", "verify", "-f", &graph, "--target", "age-claim", "--ledger", &ledger], EXIT_OK);
    expect(&["chain", "verify", "-f", &graph, "--target", "nobody", "--ledger", &ledger], EXIT_USAGE);
    let o = expect(&["chain", "lint", "-f", &graph, "--ledger", &ledger, "--deny-warnings"], EXIT_OK);
    assert_eq!(o.stdout.trim(), "no warnings");

    // make the zero-knowledge source public: loads, but breaks the build rules
    let mut g: Value = serde_json::from_slice(&std::fs::read(&graph).unwrap()).unwrap();
    let public = g["entities"].as_array().unwrap().iter().find(|e| e["id"] == "age-claim").unwrap()["domain"].clone();
    for e in g["entities"].as_array_mut().unwrap() {
        if e["id"] == "archive" {
            e["domain"] = public.clone();
        }
    }
    let planted = ws.write_json("planted.json", &g);
    expect(&["chain", "build", "-f", &planted], EXIT_FALSE);
    let o = expect(&["--json", "chain", "lint", "-f", &planted, "--ledger", &ledger], EXIT_OK);
    let v: Value = serde_json::from_str(o.stdout.trim()).unwrap();
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w["code"] == "W3"));
    expect(&["chain", "lint", "-f", &planted, "--ledger", &ledger, "--deny-warnings"], EXIT_FALSE);

    // the graph no longer matches a tampered ledger
    let good = std::fs::read_to_string(&ledger).unwrap();
    let lines: Vec<&str> = good.lines().collect();
    let short = ws.p("short.jsonl");
    std::fs::write(&short, lines[..1].join("\n")).unwrap();
    expect(&["chain", "verify", "-f", &graph, "--target", "age-claim", "--ledger", &short], EXIT_FALSE);
}

#[test]
fn scenarios_report_their_verdict() {
    let ws = Ws::new();
    for kind in ["identity", "audit", "supplychain"] {
        let out = ws.p(&format!("{kind}.json"));
        expect(&["--seed", "01", "scenario", "run", kind, "--out", &out], EXIT_OK);
        expect(&["--seed", "01", "scenario", "run", kind, "--out", &out, "--tamper"], EXIT_FALSE);
    }
    expect(&["--profile", "toy", "--seed", "01", "scenario", "run", "audit", "--out", &ws.p("toy.json")], EXIT_USAGE);

    let a = ws.p("a.json");
    let b = ws.p("b.json");
    expect(&["--seed", "beef", "scenario", "run", "audit", "--out", &a], EXIT_OK);
    expect(&["--seed", "beef", "scenario", "run", "audit", "--out", &b], EXIT_OK);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn json_output_is_canonical() {
    let ws = Ws::new();
    let (ledger, openings) = ws.committed();
    let sum = ws.p("s.zkb");
    let runs: Vec<Vec<String>> = vec![
        vec!["ledger".into(), "audit".into(), "--ledger".into(), ledger.clone()],
        vec!["prove".into(), "sum".into(), "--openings".into(), openings.clone(), "--records".into(), "alice,bob".into(), "--field".into(), "salary".into(), "--total".into(), "9000".into(), "--out".into(), sum.clone()],
        vec!["verify".into(), "-f".into(), sum.clone(), "--ledger".into(), ledger.clone()],
        vec!["--seed".into(), "02".into(), "scenario".into(), "run".into(), "supplychain".into(), "--out".into(), ws.p("t.json")],
    ];
    for args in runs {
        let mut argv = vec!["--json"];
        argv.extend(args.iter().map(String::as_str));
        let o = expect(&argv, EXIT_OK);
        let line = o.stdout.trim_end_matches('\n');
        assert!(canonical::is_canonical(line.as_bytes()), "{line}");
        let v: Value = canonical::from_slice(line.as_bytes()).unwrap();
        assert_eq!(canonical::to_string(&v).unwrap(), line);
    }
    for file in [ws.path("s.zkb"), ws.path("t.json"), PathBuf::from(&openings)] {
        assert!(canonical::is_canonical(&std::fs::read(file).unwrap()));
    }
}

#[test]
fn profile_comes_from_the_environment() {
    let ws = Ws::new();
    let bin = env!("CARGO_BIN_EXE_proofchain");
    let status = std::process::Command::new(bin)
        .args(["--seed", "01", "scenario", "run", "audit", "--out", &ws.p("t.json")])
        .env("PROOFCHAIN_PROFILE", "toy")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_USAGE));
    let status = std::process::Command::new(bin)
        .args(["--profile", "test", "--seed", "01", "scenario", "run", "audit", "--out", &ws.p("t.json")])
        .env("PROOFCHAIN_PROFILE", "toy")
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
}
