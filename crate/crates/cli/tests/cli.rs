use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use plenum_service::querylog::{append_entries, QueryLogEntry};
use plenum_service::ExportBundle;
use plenum_testkit::fixture;

fn plenum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plenum"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = plenum(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn file_count(dir: &Path) -> usize {
    std::fs::read_dir(dir).unwrap().count()
}

/// Runs every stage over the XML fixtures; returns the snapshot directory.
fn build(root: &Path) -> std::path::PathBuf {
    let raw = root.join("raw");
    ok(&[
        "ingest",
        "--schema",
        "germaparl",
        s(&fixture("germaparl")),
        "-o",
        s(&raw),
    ]);
    assert_eq!(file_count(&raw), 2);
    ok(&[
        "ingest",
        "--schema",
        "bundestag",
        s(&fixture("bundestag/20-012.xml")),
        "-o",
        s(&raw),
    ]);
    assert_eq!(file_count(&raw), 3);
    ok(&["segment", s(&raw), "-o", s(&root.join("seg"))]);
    ok(&["annotate", s(&root.join("seg")), "-o", s(&root.join("ann"))]);
    ok(&[
        "resolve",
        s(&root.join("ann")),
        "-o",
        s(&root.join("res")),
        "--mps",
        s(&fixture("mps.csv")),
    ]);
    let snap = root.join("snapshot");
    ok(&["index", s(&root.join("res")), "-o", s(&snap)]);
    snap
}

#[test]
fn stages_run_end_to_end_and_deterministically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let sa = build(a.path());
    let sb = build(b.path());
    let file = plenum_core::index::snapshot::FILE_NAME;
    assert_eq!(
        std::fs::read(sa.join(file)).unwrap(),
        std::fs::read(sb.join(file)).unwrap()
    );

    // Stages are idempotent on their own output.
    let again = a.path().join("again");
    ok(&["annotate", s(&a.path().join("ann")), "-o", s(&again)]);
    for f in std::fs::read_dir(a.path().join("ann")).unwrap() {
        let f = f.unwrap().path();
        assert_eq!(
            std::fs::read(&f).unwrap(),
            std::fs::read(again.join(f.file_name().unwrap())).unwrap()
        );
    }

    let topics = ok(&["stats", "topics", s(&sa)]);
    let map: serde_json::Value = serde_json::from_str(&topics).unwrap();
    assert!(map["19"]["PresidencyAction"].as_u64().unwrap() >= 5);

    let out = a.path().join("export.json");
    let q = r#"{"clauses":[{"op":"AND","field":"has_call_to_order","value":"true"}],"sort":"date_asc"}"#;
    ok(&["export", s(&sa), "--query", q, "-o", s(&out)]);
    let bundle = ExportBundle::from_reader(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(bundle.records.len(), 3);

    let over = plenum(&["export", s(&sa), "--query", q, "--cap", "1"]);
    assert_eq!(over.status.code(), Some(1));
    let stdout = ok(&["export", s(&sa), "--query", q, "--cap", "1", "--truncate"]);
    let bundle: ExportBundle = serde_json::from_str(&stdout).unwrap();
    assert!(bundle.truncated);
    assert_eq!(bundle.records.len(), 1);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("nope");
    let out = plenum(&["segment", s(&missing), "-o", s(&tmp.path().join("o"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&missing)));

    assert_eq!(plenum(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        plenum(&["ingest", "--schema", "tei", "x", "-o", "y"]).status.code(),
        Some(2)
    );
    assert_eq!(plenum(&["index"]).status.code(), Some(2));

    // Wrong schema for the file is a data error.
    let out = plenum(&[
        "ingest",
        "--schema",
        "bundestag",
        s(&fixture("germaparl/19-183.xml")),
        "-o",
        s(&tmp.path().join("o")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    let bad_query = plenum(&["export", s(tmp.path()), "--query", "{}"]);
    assert_eq!(bad_query.status.code(), Some(1));
}

#[test]
fn top_terms_table() {
    let tmp = tempfile::tempdir().unwrap();
    let t = Utc.with_ymd_and_hms(2024, 2, 1, 10, 0, 0).unwrap();
    let mut entries = Vec::new();
    for (term, n) in [("cdu", 3), ("merkel", 2), ("exec", 5), ("spd", 2)] {
        for _ in 0..n {
            entries.push(QueryLogEntry {
                timestamp: t,
                raw_terms: vec![term.into()],
                clause_count: 1,
                excluded: false,
            });
        }
    }
    append_entries(tmp.path(), &entries).unwrap();
    let out = ok(&["stats", "top-terms", "--log", s(tmp.path()), "-n", "10"]);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split_whitespace().collect()).collect();
    assert_eq!(
        rows,
        [vec!["1", "cdu", "3"], vec!["2", "merkel", "2"], vec!["3", "spd", "2"]]
    );

    let deny = tmp.path().join("deny.txt");
    std::fs::write(&deny, "# extra terms\nmerkel\n").unwrap();
    let out = ok(&[
        "stats",
        "top-terms",
        "--log",
        s(tmp.path()),
        "--denylist",
        s(&deny),
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v,
        serde_json::json!([{"term": "cdu", "frequency": 3}, {"term": "spd", "frequency": 2}])
    );
}

fn http_get(port: u16, path: &str) -> Option<String> {
    let mut stream = TcpStream::connect(("127.0.0.1", port)).ok()?;
    stream.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )
    .ok()?;
    let mut buf = String::new();
    stream.read_to_string(&mut buf).ok()?;
    Some(buf)
}

#[test]
fn serve_answers_health_checks() {
    let tmp = tempfile::tempdir().unwrap();
    let snap = build(tmp.path());
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let mut child = Command::new(env!("CARGO_BIN_EXE_plenum"))
        .args([
            "serve",
            s(&snap),
            "--port",
            &port.to_string(),
            "--log-dir",
            s(&tmp.path().join("qlog")),
        ])
        .env("RUST_LOG", "warn")
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let deadline = Instant::now() + Duration::from_secs(20);
    let mut response = None;
    while Instant::now() < deadline {
        match http_get(port, "/healthz") {
            Some(r) if r.contains("\"index_loaded\":true") => {
                response = Some(r);
                break;
            }
            _ => std::thread::sleep(Duration::from_millis(100)),
        }
    }
    let search = http_get(port, "/api/search?q=%7B%22clauses%22%3A%5B%5D%7D");
    child.kill().unwrap();
    child.wait().unwrap();
    let response = response.expect("service became healthy");
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"status\":\"ok\""));
    let body = |r: &str| -> serde_json::Value { serde_json::from_str(r.split("\r\n\r\n").nth(1).unwrap()).unwrap() };
    let docs = body(&response)["doc_count"].as_u64().unwrap();
    assert!(docs > 0);
    assert_eq!(body(&search.unwrap())["total"].as_u64(), Some(docs));
}

#[test]
fn bundestag_copy_of_a_session_wins_in_either_order() {
    for order in [["bundestag", "germaparl"], ["germaparl", "bundestag"]] {
        let dir = tempfile::tempdir().unwrap();
        let raw = dir.path().join("raw");
        for schema in order {
            let input = fixture(&format!("{schema}/19-183.xml"));
            ok(&["ingest", "--schema", schema, s(&input), "-o", s(&raw)]);
        }
        let text = std::fs::read_to_string(raw.join("19-0183.jsonl")).unwrap();
        assert!(text.contains("bundestag/19-183.xml"), "{order:?}");
        assert!(!text.contains("germaparl/19-183.xml"), "{order:?}");
    }
}
