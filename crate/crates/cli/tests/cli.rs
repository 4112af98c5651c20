use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use noticescope::fixture::{FixtureServer, SyntheticCorpus};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noticescope"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

struct Fixture {
    _servers: [FixtureServer; 2],
    dir: tempfile::TempDir,
    config: PathBuf,
}

fn fixture(list: &Path) -> Fixture {
    let corpus = SyntheticCorpus::standard();
    let a = FixtureServer::start(corpus.handler()).unwrap();
    let b = FixtureServer::start(corpus.handler()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let config = corpus
        .write_crawl_inputs(
            dir.path(),
            &[("NL", &a.url(), "nl-NL"), ("US", &b.url(), "en-US")],
            list,
            4,
        )
        .unwrap();
    Fixture {
        _servers: [a, b],
        dir,
        config,
    }
}

#[test]
fn parse_filters_prints_line_accounting() {
    let path = data("cookie-notices.txt");
    let out = run(&["parse-filters", s(&path)]);
    let stats: Value = serde_json::from_slice(&out.stdout).unwrap();
    let lines = fs::read_to_string(&path).unwrap().lines().count() as u64;
    let sum: u64 = ["parsed", "skipped", "malformed", "comments"]
        .iter()
        .map(|k| stats[k].as_u64().unwrap())
        .sum();
    assert_eq!(sum, lines);
    assert!(String::from_utf8_lossy(&out.stderr).contains("hide rules"));

    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("stats.json");
    let out = run(&["parse-filters", s(&path), "--stats-json", s(&json)]);
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(written, stats);
}

#[test]
fn staged_commands_chain() {
    let f = fixture(&data("cookie-notices.txt"));
    let d = f.dir.path();
    let run_dir = d.join("run");
    let crawl = run(&["crawl", "--config", s(&f.config), "--out", s(&run_dir)]);
    let summary: Value = serde_json::from_slice(&crawl.stdout).unwrap();
    assert!(summary.is_object());

    let obs = d.join("obs.jsonl");
    run(&["measure", "--run", s(&run_dir), "--out", s(&obs)]);
    assert_eq!(fs::read_to_string(&obs).unwrap().lines().count(), 80);

    let fit = d.join("fit.json");
    run(&[
        "fit",
        "--observations",
        s(&obs),
        "--model",
        "table3",
        "--out",
        s(&fit),
    ]);
    let report: Value = serde_json::from_str(&fs::read_to_string(&fit).unwrap()).unwrap();
    assert_eq!(report["comparison"].as_array().unwrap().len(), 5);

    let single = d.join("single.json");
    run(&[
        "fit",
        "--observations",
        s(&obs),
        "--model",
        "banner_exists ~ 1",
        "--out",
        s(&single),
    ]);
    let one: Value = serde_json::from_str(&fs::read_to_string(&single).unwrap()).unwrap();
    let b0 = one["best"]["coefficients"][0]["coefficient"]
        .as_f64()
        .unwrap();
    assert!((b0 - 1.5f64.ln()).abs() < 1e-6, "{one}");

    let reports = d.join("reports");
    let out = run(&["report", "--observations", s(&obs), "--out", s(&reports)]);
    let listed: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().collect();
    assert_eq!(listed.len(), 6);
    assert!(listed.iter().all(|p| Path::new(p).is_file()));
    let table = fs::read_to_string(reports.join("tld_table.csv")).unwrap();
    assert!(!table.contains(".com,"));
    run(&[
        "report",
        "--observations",
        s(&obs),
        "--out",
        s(&reports),
        "--include-com",
    ]);
    assert!(fs::read_to_string(reports.join("tld_table.csv"))
        .unwrap()
        .contains(".com,"));

    let corpus = SyntheticCorpus::standard();
    let mut truth = String::from("domain,vantage,label\n");
    for site in &corpus.sites {
        let label = if site.banner.is_some() {
            "banner"
        } else {
            "no_banner"
        };
        truth += &format!("{},NL,{label}\n", site.domain);
    }
    let truth_path = d.join("truth.csv");
    fs::write(&truth_path, truth).unwrap();
    let out = run(&[
        "evaluate",
        "--predictions",
        s(&obs),
        "--truth",
        s(&truth_path),
    ]);
    let eval: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(eval["accuracy"].as_f64(), Some(1.0), "{eval}");
    assert_eq!(eval["counts"]["tp"].as_u64(), Some(24));
}

#[test]
fn pipeline_lists_artifact_digests() {
    let f = fixture(&data("cookie-notices.txt"));
    let out_dir = f.dir.path().join("out");
    let out = run(&["pipeline", "--config", s(&f.config), "--out", s(&out_dir)]);
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines() {
        let (digest, path) = line.split_once("  ").unwrap();
        assert_eq!(digest.len(), 64);
        assert!(out_dir.join(path).is_file(), "{path}");
    }
    assert!(text.contains("observations.jsonl"));
    assert!(out_dir.join("pipeline.json").is_file());
}

#[test]
fn failures_exit_nonzero() {
    let missing = bin()
        .args(["parse-filters", "/nonexistent/list.txt"])
        .output()
        .unwrap();
    assert!(!missing.status.success());

    let f = fixture(Path::new("/nonexistent/cookie-list.txt"));
    let crawl = bin()
        .args([
            "crawl",
            "--config",
            s(&f.config),
            "--out",
            s(&f.dir.path().join("run")),
        ])
        .output()
        .unwrap();
    assert!(!crawl.status.success());
    assert!(!f.dir.path().join("run").exists());

    let obs = f.dir.path().join("obs.jsonl");
    fs::write(&obs, "").unwrap();
    let bad = bin()
        .args([
            "fit",
            "--observations",
            s(&obs),
            "--model",
            "clicks ~ TLD",
            "--out",
            "/dev/null",
        ])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("clicks"));
}
