use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use plenum_core::build_index;
use plenum_core::index::{Clause, Field, Op, Query};
use plenum_core::model::{SpanKind, EXPORT_SCHEMA};
use plenum_service::app::{Health, SearchResponse, SpeechResponse};
use plenum_service::querylog::{self, TermCount};
use plenum_service::{router, AppState, Denylist, ExportBundle, QueryLogger, ServiceConfig};
use plenum_testkit::fixtures::{five_records, pipeline_records};
use plenum_testkit::json_schema::Checker;
use serde_json::Value;
use tower::ServiceExt;

fn state(config: ServiceConfig) -> Arc<AppState> {
    Arc::new(AppState::new(config, Denylist::default(), QueryLogger::disabled()))
}

fn app_with(records: Vec<plenum_core::SpeechContribution>) -> Router {
    let s = state(ServiceConfig::default());
    s.install(build_index(records).unwrap());
    router(s)
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

fn search_req(q: &Query) -> Request<Body> {
    let json = serde_json::to_string(q).unwrap();
    let uri = format!("/api/search?q={}", encode(&json));
    Request::get(uri).body(Body::empty()).unwrap()
}

fn encode(s: &str) -> String {
    s.bytes()
        .map(|b| match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' => (b as char).to_string(),
            _ => format!("%{b:02X}"),
        })
        .collect()
}

fn export_req(body: Value) -> Request<Body> {
    Request::post("/api/export")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

#[tokio::test]
async fn search_by_period() {
    let app = app_with(five_records());
    let q = Query::new(vec![Clause::new(Op::And, Field::LegislativePeriod, "19")]);
    let (status, body) = call(&app, search_req(&q)).await;
    assert_eq!(status, StatusCode::OK);
    let res: SearchResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(res.total, 2);
    assert_eq!(res.hits.len(), 2);
    assert!(res.hits.iter().all(|h| h.speaker == "Angela Merkel"));
}

#[tokio::test]
async fn search_hits_carry_highlights() {
    let records = five_records();
    let app = app_with(records.clone());
    let q = Query::new(vec![Clause::new(Op::And, Field::FullText, "klimawandel")]);
    let (_, body) = call(&app, search_req(&q)).await;
    let res: SearchResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(res.total, 2);
    // Two occurrences outrank one.
    assert_eq!(res.hits[0].id, "19-1-1-2");
    for h in &res.hits {
        let r = records.iter().find(|r| r.id == h.id).unwrap();
        assert!(!h.snippet.highlights.is_empty());
        for [a, b] in &h.snippet.highlights {
            assert_eq!(r.slice(*a, *b), "Klimawandel");
        }
    }
}

#[tokio::test]
async fn bad_queries_are_400() {
    let app = app_with(five_records());
    for q in [
        r#"{"clauses":[{"op":"AND","field":"colour","value":"red"}]}"#,
        r#"{"clauses":[{"op":"AND","field":"date","value":"2020-01-01..2019-01-01"}]}"#,
        r#"{"clauses":[],"page":0}"#,
        "not json",
    ] {
        let (status, body) = call(&app, get(&format!("/api/search?q={}", encode(q)))).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{q}");
        let err: Value = serde_json::from_slice(&body).unwrap();
        assert_eq!(err["error"], "InvalidQuery");
    }
    let (status, _) = call(&app, get("/api/search")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn unavailable_before_first_snapshot() {
    let s = state(ServiceConfig::default());
    let app = router(s.clone());
    let (status, _) = call(&app, search_req(&Query::default())).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, _) = call(&app, get("/api/stats/topics")).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (status, body) = call(&app, get("/healthz")).await;
    assert_eq!(status, StatusCode::OK);
    let h: Health = serde_json::from_slice(&body).unwrap();
    assert!(!h.index_loaded);

    s.install(build_index(five_records()).unwrap());
    let (status, body) = call(&app, search_req(&Query::default())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(serde_json::from_slice::<SearchResponse>(&body).unwrap().total, 5);
}

#[tokio::test]
async fn speech_detail_lists_annotators() {
    let records = pipeline_records();
    let app = app_with(records.clone());
    let with_two = records
        .iter()
        .find(|r| {
            let mut ids: Vec<&str> = r
                .annotations
                .iter()
                .filter(|a| a.kind == SpanKind::NerEntity)
                .map(|a| a.annotator.as_str())
                .collect();
            ids.sort();
            ids.dedup();
            ids.len() == 2
        })
        .unwrap();
    let (status, body) = call(&app, get(&format!("/api/speech/{}", with_two.id))).await;
    assert_eq!(status, StatusCode::OK);
    let res: SpeechResponse = serde_json::from_slice(&body).unwrap();
    assert_eq!(&res.record, with_two);
    assert_eq!(res.annotators, ["ner-german", "ner-german-legal"]);

    let (status, body) = call(&app, get("/api/speech/99-1-1-1")).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(serde_json::from_slice::<Value>(&body).unwrap()["error"], "UnknownId");
}

#[tokio::test]
async fn export_validates_and_roundtrips() {
    let records = pipeline_records();
    let app = app_with(records.clone());
    let schema: Value = serde_json::from_str(EXPORT_SCHEMA).unwrap();
    let q = Query::new(vec![Clause::new(Op::And, Field::HasCallToOrder, "true")]).sorted(plenum_core::Sort::DateAsc);
    let (status, body) = call(&app, export_req(serde_json::json!({ "query": q }))).await;
    assert_eq!(status, StatusCode::OK);
    let value: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(Checker::new(&schema).check(&value), Vec::<String>::new());
    let bundle = ExportBundle::from_reader(body.as_slice()).unwrap();
    assert_eq!(bundle.query, q);
    assert_eq!(bundle.records.len(), 3);
    assert!(!bundle.truncated);
    for w in bundle.records.windows(2) {
        assert!(w[0].date <= w[1].date);
    }
    for r in &bundle.records {
        assert_eq!(Some(r), records.iter().find(|x| x.id == r.id));
    }
}

#[tokio::test]
async fn export_cap_and_truncation() {
    let app = app_with(five_records());
    let q = Query::new(vec![Clause::new(Op::And, Field::LegislativePeriod, "19")]);
    let (status, body) = call(&app, export_req(serde_json::json!({ "query": q, "cap": 1 }))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    assert_eq!(serde_json::from_slice::<Value>(&body).unwrap()["error"], "CapExceeded");

    let (status, body) = call(
        &app,
        export_req(serde_json::json!({ "query": q, "cap": 1, "truncate": true })),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let bundle = ExportBundle::from_reader(body.as_slice()).unwrap();
    assert_eq!(bundle.records.len(), 1);
    assert!(bundle.truncated);

    let (status, _) = call(&app, export_req(serde_json::json!({ "query": q, "cap": 10_001 }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, export_req(serde_json::json!({ "q": q }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn configured_cap_applies_by_default() {
    let s = state(ServiceConfig {
        export_cap: 3,
        ..Default::default()
    });
    s.install(build_index(five_records()).unwrap());
    let app = router(s);
    let (status, _) = call(&app, export_req(serde_json::json!({ "query": Query::default() }))).await;
    assert_eq!(status, StatusCode::PAYLOAD_TOO_LARGE);
    let (status, _) = call(
        &app,
        export_req(serde_json::json!({ "query": Query::default(), "cap": 5 })),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn topic_statistics() {
    let app = app_with(pipeline_records());
    let (status, body) = call(&app, get("/api/stats/topics")).await;
    assert_eq!(status, StatusCode::OK);
    let map: std::collections::BTreeMap<u32, std::collections::BTreeMap<String, u64>> =
        serde_json::from_slice(&body).unwrap();
    let presidency_19 = pipeline_records()
        .iter()
        .filter(|r| r.legislative_period == 19 && r.role == plenum_core::model::Role::President)
        .count() as u64;
    assert_eq!(map[&19]["PresidencyAction"], presidency_19);

    let empty = app_with(Vec::new());
    let (_, body) = call(&empty, get("/api/stats/topics")).await;
    assert_eq!(body, b"{}");
}

#[tokio::test]
async fn searches_are_logged_and_counted() {
    let dir = tempfile::tempdir().unwrap();
    let (logger, writer) = QueryLogger::spawn(dir.path().to_path_buf());
    let config = ServiceConfig {
        log_path: dir.path().to_path_buf(),
        ..Default::default()
    };
    let s = Arc::new(AppState::new(config, Denylist::default(), logger));
    s.install(build_index(five_records()).unwrap());
    let app = router(s);
    for value in ["Migration", "migration", "\"Klimawandel\"", "exec xp_cmdshell"] {
        let q = Query::new(vec![Clause::new(Op::And, Field::FullText, value)]);
        assert_eq!(call(&app, search_req(&q)).await.0, StatusCode::OK);
    }
    // Dropping the router drops the last logger; the writer then drains.
    drop(app);
    writer.await.unwrap();
    let entries = querylog::read_entries(dir.path()).unwrap();
    assert_eq!(entries.len(), 4);
    assert_eq!(entries.iter().filter(|e| e.excluded).count(), 1);
    let top = querylog::top_terms(&entries, 10, &Denylist::default());
    assert_eq!(
        top,
        [
            TermCount {
                term: "migration".into(),
                frequency: 2
            },
            TermCount {
                term: "klimawandel".into(),
                frequency: 1
            },
        ]
    );
}

#[tokio::test]
async fn top_terms_parameter_checks() {
    let app = app_with(five_records());
    assert_eq!(
        call(&app, get("/api/stats/top-terms?n=ten")).await.0,
        StatusCode::BAD_REQUEST
    );
    let (status, body) = call(&app, get("/api/stats/top-terms")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"[]");
}
