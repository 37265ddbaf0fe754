use std::path::Path;
use std::process::{Command, Output};

use aepp_cli::args::Cli;
use aepp_cli::output::{read_csv, CrossoverRow, Document, McRow, PointRow};
use aepp_cli::run::execute;
use clap::Parser;

fn aepp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aepp"))
        .args(args)
        .env_remove("AEPP_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = aepp(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn in_memory(args: &[&str]) -> Document {
    let cli = Cli::try_parse_from(std::iter::once("aepp").chain(args.iter().copied())).unwrap();
    execute(cli.command.as_ref().unwrap()).unwrap().document
}

#[test]
fn sweep_rows() {
    let csv = stdout(&["sweep", "--protocol", "aepp-a", "--n", "2", "--grid", "0.5:1.0:11"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("F,protocol,yield"));
    assert_eq!(csv.lines().last(), Some("1.0,aepp-a-n2,0.75"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn hashing_yield_at_one() {
    assert_eq!(
        stdout(&["yield", "--protocol", "hashing", "--f", "1.0"]),
        "F,protocol,yield\n1.0,hashing,1.0\n"
    );
}

#[test]
fn csv_round_trips_to_rounded_rows() {
    let args = [
        "sweep",
        "--protocol",
        "aepp-a,leung-shor,hashing",
        "--n",
        "2,3",
        "--grid",
        "0.6:1.0:17",
    ];
    let csv = stdout(&args);
    let parsed: Vec<PointRow> = read_csv(csv.as_bytes()).unwrap();
    let doc = in_memory(&args);
    let expected: Vec<PointRow> = doc.points.unwrap().iter().map(PointRow::rounded).collect();
    assert_eq!(parsed, expected);
    assert_eq!(parsed.len(), 4 * 17);
}

#[test]
fn json_round_trips_exactly() {
    let args = ["compare", "--grid", "0.7:1.0:7", "--format", "json"];
    let json = stdout(&args);
    let parsed = Document::read_json(json.as_bytes()).unwrap();
    let mut doc = in_memory(&args[..3]);
    doc.params = parsed.params.clone();
    assert_eq!(parsed, doc);
    // and re-encoding is byte-identical
    let mut again = Vec::new();
    parsed.write_json(&mut again).unwrap();
    assert_eq!(String::from_utf8(again).unwrap(), json);
}

#[test]
fn yield_json_carries_branches() {
    let json = stdout(&["yield", "--protocol", "aepp-a-n3", "--f", "0.9", "--format", "json"]);
    let doc = Document::read_json(json.as_bytes()).unwrap();
    let yields = doc.yields.unwrap();
    assert_eq!(yields.len(), 1);
    let total: f64 = yields[0].branches.iter().map(|b| b.probability).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(doc.points.unwrap()[0].yield_value, yields[0].yield_value);
}

#[test]
fn envelope_crossover() {
    let json = stdout(&[
        "crossover",
        "--protocol",
        "envelope",
        "--n-max",
        "6",
        "--format",
        "json",
    ]);
    let doc = Document::read_json(json.as_bytes()).unwrap();
    let row = &doc.crossovers.unwrap()[0];
    assert!(row.found);
    let (lo, hi) = (row.lo.unwrap(), row.hi.unwrap());
    assert!(hi - lo <= 1e-6);
    assert!((row.f_cross.unwrap() - 0.993).abs() <= 0.002);
}

#[test]
fn per_exponent_crossovers_and_missing_ones() {
    let csv = stdout(&["crossover", "--protocol", "aepp-a,hashing", "--n", "2"]);
    let rows: Vec<CrossoverRow> = read_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].found && rows[0].f_cross.unwrap() < 0.95);
    assert!(!rows[1].found && rows[1].f_cross.is_none());
}

#[test]
fn mc_is_reproducible_and_echoes_seed() {
    let args = [
        "mc",
        "--protocol",
        "aepp-a-n2",
        "--f",
        "0.9",
        "--shots",
        "50000",
        "--seed",
        "42",
        "--format",
        "json",
    ];
    let first = stdout(&args);
    assert_eq!(first, stdout(&args));
    let doc = Document::read_json(first.as_bytes()).unwrap();
    assert_eq!(doc.params.seed, Some(42));
    let summary = &doc.mc.unwrap()[0];
    assert_eq!(summary.seed, 42);
    assert!(summary.within_4_sigma);
    let branches = doc.branches.unwrap();
    assert_eq!(branches.iter().map(|b| b.count).sum::<u64>(), 50_000);

    let csv = stdout(&args[..9]);
    let rows: Vec<McRow> = read_csv(csv.as_bytes()).unwrap();
    assert_eq!(rows, branches.iter().map(McRow::rounded).collect::<Vec<_>>());
}

#[test]
fn asymptote_tables() {
    let csv = stdout(&["asymptote", "--n-max", "2"]);
    assert_eq!(csv.lines().next(), Some("n,fidelity,p,deviation"));
    assert!(csv.lines().nth(1).unwrap().starts_with("1,0.5,0.555555555556,"));
    let adv = stdout(&["asymptote", "--advantage", "--n-max", "3"]);
    assert_eq!(adv.lines().count(), 4);
}

#[test]
fn usage_errors() {
    for args in [
        &["yield", "--protocol", "nope", "--f", "0.9"][..],
        &["yield", "--protocol", "aepp-a-n2", "--f", "1.5"],
        &["sweep", "--protocol", "aepp-a-n2", "--grid", "0.5:1.0"],
        &["sweep", "--protocol", "aepp-a", "--grid", "0.5:1.0:5"],
    ] {
        let out = aepp(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    let out = aepp(&["yield", "--protocol", "nope", "--f", "0.9"]);
    let msg = String::from_utf8(out.stderr).unwrap();
    assert!(msg.contains("leung-shor") && msg.contains("envelope"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_aepp"))
        .args(["yield", "--protocol", "aepp-a-n2", "--f", "1", "--format", "json"])
        .env("AEPP_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(dir.path().join("yield.json")).unwrap();
    assert!(written.contains("\"version\": \"1\""));

    let explicit = dir.path().join("nested").join("sweep.csv");
    let out = aepp(&[
        "sweep",
        "--protocol",
        "aepp-a-n1",
        "--grid",
        "0.9:1:2",
        "--output",
        explicit.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(Path::new(&explicit).exists());
}

#[test]
fn unwritable_output_fails() {
    let out = aepp(&[
        "yield",
        "--protocol",
        "hashing",
        "--f",
        "1",
        "--output",
        "/proc/none/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot"));
}

#[test]
fn self_checks_pass() {
    let out = aepp(&["--check"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(out.status.success(), "{err}");
    assert!(!err.contains("FAIL"));
}
