mod support;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mentionscope::ingest::count_hashtags;
use support::fixture::*;
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mentionscope"));
    cmd.env_remove("MENTIONSCOPE_OUTPUT_DIR");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: PathBuf) -> String {
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn ingest_empty_input_writes_header_only() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("empty.jsonl");
    std::fs::write(&input, "").unwrap();
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--output-dir", s(&out)]);
    assert_eq!(read(out.join("edges.csv")), "src,dst,week,weight\n");
    assert_eq!(read(out.join("hashtags.json")).trim(), "[]");
}

#[test]
fn ingest_hashtag_report_matches_library() {
    let dir = TempDir::new().unwrap();
    let records = &synthetic_corpus(3, 1)[..];
    let mut records = records.to_vec();
    records[0].hashtags = vec!["alpha".into(), "Beta".into()];
    records[1].hashtags = vec!["beta".into()];
    records[2].hashtags = vec!["gamma".into()];
    let input = dir.path().join("three.jsonl");
    write_jsonl(&input, &records);
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--output-dir", s(&out)]);

    let report: serde_json::Value = serde_json::from_str(&read(out.join("hashtags.json"))).unwrap();
    let expected = count_hashtags(&records, 8).unwrap();
    let rows = report.as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for (row, (tag, count)) in rows.iter().zip(expected) {
        assert_eq!(row["hashtag"], tag.as_str());
        assert_eq!(row["count"], count);
    }
    assert!(read(out.join("edges.csv")).lines().count() > 1);
}

#[test]
fn malformed_line_is_a_warning_not_a_failure() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("bad.jsonl");
    let good = synthetic_corpus(2, 2);
    let body = format!("{}\n{{\"id\": \"x\", \"auth\n{}\n", good[0].to_json_line(), good[1].to_json_line());
    std::fs::write(&input, body).unwrap();
    let out = run(&["ingest", "-i", s(&input), "--output-dir", s(&dir.path().join("out"))]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped 1 malformed line"));
}

#[test]
fn fatal_errors_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.jsonl");
    let out = run(&["ingest", "-i", s(&missing), "--output-dir", s(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.jsonl"));

    let input = dir.path().join("x.jsonl");
    std::fs::write(&input, "").unwrap();
    let out = run(&["ingest", "-i", s(&input), "--format", "xml", "--output-dir", s(dir.path())]);
    assert!(!out.status.success());
}

fn two_triangle_input(dir: &Path) -> PathBuf {
    let input = dir.join("tri.jsonl");
    write_jsonl(&input, &two_triangle_records(COP21_START));
    input
}

#[test]
fn communities_on_two_triangles() {
    let dir = TempDir::new().unwrap();
    let input = two_triangle_input(dir.path());
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--output-dir", s(&out)]);
    ok(&["communities", "--degree-threshold", "2", "--partitions", "--output-dir", s(&out)]);
    assert_eq!(read(out.join("communities.csv")), "week,num_communities,modularity\n2395,2,0.5\n");
    assert_eq!(
        read(out.join("stats.csv")),
        "week,num_nodes,num_edges,density,total_weight\n2395,6,6,0.2,6\n"
    );
    let part = read(out.join("partitions").join("week_2395.csv"));
    assert_eq!(part.lines().next(), Some("node_id,community_id"));
    assert_eq!(part.lines().count(), 7);

    let first = read(out.join("communities.csv"));
    ok(&["communities", "--degree-threshold", "2", "--output-dir", s(&out)]);
    assert_eq!(read(out.join("communities.csv")), first);
}

#[test]
fn threshold_that_removes_everything_warns() {
    let dir = TempDir::new().unwrap();
    let input = two_triangle_input(dir.path());
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--output-dir", s(&out)]);
    let res = ok(&["communities", "--output-dir", s(&out)]);
    assert!(String::from_utf8_lossy(&res.stderr).contains("empty graph"));
    assert_eq!(read(out.join("communities.csv")), "week,num_communities,modularity\n");
}

#[test]
fn seed_spread_report() {
    let dir = TempDir::new().unwrap();
    let input = two_triangle_input(dir.path());
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--output-dir", s(&out)]);
    ok(&["communities", "--degree-threshold", "1", "--seed-runs", "3", "--output-dir", s(&out)]);
    let spread = read(out.join("communities_spread.csv"));
    let mut lines = spread.lines();
    assert!(lines.next().unwrap().starts_with("week,runs,min_communities"));
    assert!(lines.next().unwrap().starts_with("2395,3,2,2,2"));
}

#[test]
fn event_reports() {
    let dir = TempDir::new().unwrap();
    let input = two_triangle_input(dir.path());
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--output-dir", s(&out)]);
    ok(&["events", "--degree-threshold", "1", "--output-dir", s(&out)]);
    let mut files: Vec<_> = std::fs::read_dir(out.join("events")).unwrap().map(|e| e.unwrap().file_name()).collect();
    files.sort();
    assert_eq!(files.len(), 13);
    let cop21 = read(out.join("events").join("COP21.csv"));
    assert_eq!(cop21.lines().count(), 22);
    assert!(cop21.contains("\nCOP21,2395,0,6,6,0.2,2,0.5\n"));

    let cal = dir.path().join("cal.csv");
    std::fs::write(&cal, "name,start,end,location\nSummit,2015-12-01,2015-12-02,Somewhere\n").unwrap();
    let single = dir.path().join("single");
    ok(&[
        "events", "--edges", s(&out.join("edges.csv")), "--events", s(&cal), "--window", "0",
        "--degree-threshold", "1", "--output-dir", s(&single),
    ]);
    let files: Vec<_> = std::fs::read_dir(single.join("events")).unwrap().collect();
    assert_eq!(files.len(), 1);
    assert_eq!(read(single.join("events").join("Summit.csv")).lines().count(), 2);
}

#[test]
fn sentiment_and_topics_outputs() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_jsonl(&input, &synthetic_corpus(200, 5));
    let out = dir.path().join("out");
    ok(&["sentiment", "-i", s(&input), "--output-dir", s(&out)]);
    let d: serde_json::Value = serde_json::from_str(&read(out.join("sentiment.json"))).unwrap();
    let sum = d["positive"].as_f64().unwrap() + d["negative"].as_f64().unwrap() + d["neutral"].as_f64().unwrap();
    assert!((sum - 1.0).abs() < 1e-12);
    assert_eq!(d["n"], 200);

    ok(&["topics", "-i", s(&input), "--topics", "3", "--top-words", "5", "--output-dir", s(&out)]);
    let t: serde_json::Value = serde_json::from_str(&read(out.join("topics.json"))).unwrap();
    let topics = t.as_array().unwrap();
    assert_eq!(topics.len(), 3);
    for (i, topic) in topics.iter().enumerate() {
        assert_eq!(topic["topic"], i);
        assert_eq!(topic["words"].as_array().unwrap().len(), 5);
    }
    assert!(read(out.join("vocabulary.csv")).starts_with("term,index,df\n"));
}

#[test]
fn config_file_env_and_flags() {
    let dir = TempDir::new().unwrap();
    let input = two_triangle_input(dir.path());
    let cfg = dir.path().join("config.toml");
    std::fs::write(&cfg, format!("input = [{:?}]\ndegree-threshold = 2\nwindow = 0\n", s(&input))).unwrap();
    let env_out = dir.path().join("env_out");
    let status = bin()
        .args(["--config", s(&cfg), "ingest"])
        .env("MENTIONSCOPE_OUTPUT_DIR", &env_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_out.join("edges.csv").exists());

    let res = bin()
        .args(["--config", s(&cfg), "communities", "--degree-threshold", "100"])
        .env("MENTIONSCOPE_OUTPUT_DIR", &env_out)
        .output()
        .unwrap();
    assert!(res.status.success());
    assert_eq!(read(env_out.join("communities.csv")), "week,num_communities,modularity\n");

    let flag_out = dir.path().join("flag_out");
    let status = bin()
        .args(["--config", s(&cfg), "--output-dir", s(&flag_out), "ingest"])
        .env("MENTIONSCOPE_OUTPUT_DIR", &env_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(flag_out.join("edges.csv").exists());

    std::fs::write(&cfg, "nonsense = 3\n").unwrap();
    assert!(!run(&["--config", s(&cfg), "ingest"]).status.success());
}

#[test]
fn csv_input_format() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("tri.csv");
    let mut buf = Vec::new();
    mentionscope::ingest::write_csv(&mut buf, &two_triangle_records(0)).unwrap();
    std::fs::write(&input, buf).unwrap();
    let out = dir.path().join("out");
    ok(&["ingest", "-i", s(&input), "--format", "csv", "--output-dir", s(&out)]);
    assert_eq!(read(out.join("edges.csv")).lines().count(), 7);
}
