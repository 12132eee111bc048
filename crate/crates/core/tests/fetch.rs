use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::routing::get;
use axum::Router;
use plenum_core::ingest::fetch::fetch_updates_with;
use plenum_core::ingest::{parse, FetchCursor, FetchError, RetryPolicy};
use serde::Deserialize;

const SESSIONS: [(u32, u32, &str); 3] = [(20, 1, "26.10.2021"), (20, 2, "11.11.2021"), (20, 3, "18.11.2021")];

fn protocol(period: u32, session: u32, date: &str) -> String {
    format!(
        r#"<dbtplenarprotokoll wahlperiode="{period}" sitzung-nr="{session}" sitzung-datum="{date}"><sitzungsverlauf><tagesordnungspunkt top-id="Tagesordnungspunkt 1"><rede id="r{session}"><p klasse="redner"><redner id="1"><name><vorname>Anna</vorname><nachname>Beispiel</nachname><fraktion>SPD</fraktion></name></redner>Anna Beispiel (SPD):</p><p klasse="J_1">Rede {session}.</p></rede></tagesordnungspunkt></sitzungsverlauf></dbtplenarprotokoll>"#
    )
}

#[derive(Deserialize)]
struct Params {
    limit: usize,
    after: Option<String>,
}

/// Serves the sessions after `after`, at most `limit` of them.
async fn archive(Query(p): Query<Params>) -> String {
    let body: String = SESSIONS
        .iter()
        .filter(|(per, s, _)| {
            p.after
                .as_deref()
                .is_none_or(|a| format!("{per:02}-{s:03}").as_str() > a)
        })
        .take(p.limit)
        .map(|(per, s, d)| protocol(*per, *s, d))
        .collect();
    format!("<dokumente>{body}</dokumente>")
}

async fn failing(State(hits): State<Arc<AtomicUsize>>) -> StatusCode {
    hits.fetch_add(1, Ordering::SeqCst);
    StatusCode::INTERNAL_SERVER_ERROR
}

async fn serve(app: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}/protocols")
}

fn quick() -> RetryPolicy {
    RetryPolicy {
        attempts: 3,
        base_delay: Duration::from_millis(5),
    }
}

#[tokio::test]
async fn pages_through_the_archive() {
    let url = serve(Router::new().route("/protocols", get(archive))).await;
    let client = reqwest::Client::new();
    let cursor = FetchCursor::new(url, 2);

    let (docs, next) = fetch_updates_with(&client, &cursor, quick()).await.unwrap();
    assert_eq!(docs.len(), 2);
    assert_eq!(next.last_session_key.as_deref(), Some("20-002"));
    let records = parse(&docs[1]).unwrap();
    assert_eq!(records[0].text, "Rede 2.");

    let (docs, next) = fetch_updates_with(&client, &next, quick()).await.unwrap();
    assert_eq!(docs.len(), 1);
    assert_eq!(next.last_session_key.as_deref(), Some("20-003"));

    let (docs, head) = fetch_updates_with(&client, &next, quick()).await.unwrap();
    assert!(docs.is_empty());
    assert_eq!(head, next);
}

#[tokio::test]
async fn gives_up_after_retries() {
    let hits = Arc::new(AtomicUsize::new(0));
    let app = Router::new().route("/protocols", get(failing)).with_state(hits.clone());
    let url = serve(app).await;
    let err = fetch_updates_with(&reqwest::Client::new(), &FetchCursor::new(url, 2), quick())
        .await
        .unwrap_err();
    assert!(matches!(err, FetchError::NetworkError { attempts: 3, .. }), "{err}");
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[tokio::test]
async fn rejects_non_protocol_payloads() {
    let url = serve(Router::new().route("/protocols", get(|| async { "<html><body>maintenance</body></html>" }))).await;
    let err = fetch_updates_with(&reqwest::Client::new(), &FetchCursor::new(url, 2), quick())
        .await
        .unwrap_err();
    assert!(matches!(err, FetchError::RemoteFormatError(_)), "{err}");
}

#[tokio::test]
async fn rejects_bad_page_size() {
    let err = fetch_updates_with(
        &reqwest::Client::new(),
        &FetchCursor::new("http://127.0.0.1:9/", 0),
        quick(),
    )
    .await
    .unwrap_err();
    assert!(matches!(err, FetchError::InvalidCursor(_)));
}
