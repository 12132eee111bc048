//! Incremental client for a remote open-data endpoint serving bundestag-schema
//! protocols.
//!
//! Protocol: `GET {endpoint}?limit={n}[&after={key}]` answers with either a
//! single `<dbtplenarprotokoll>` document or a `<dokumente>` wrapper holding
//! several of them. Session keys are `PP-SSS` (period, session; zero padded)
//! and order sessions chronologically.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::bundestag::{session_key, ROOT};
use super::{RawSessionDoc, Schema};
use crate::xml;

pub const MAX_PAGE_SIZE: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchCursor {
    pub endpoint_url: String,
    #[serde(default)]
    pub last_session_key: Option<String>,
    pub page_size: usize,
}

impl FetchCursor {
    pub fn new(endpoint_url: impl Into<String>, page_size: usize) -> Self {
        Self {
            endpoint_url: endpoint_url.into(),
            last_session_key: None,
            page_size,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FetchError {
    #[error("network error after {attempts} attempt(s): {message}")]
    NetworkError { attempts: u32, message: String },
    #[error("remote payload is not a bundestag protocol: {0}")]
    RemoteFormatError(String),
    #[error("invalid cursor: {0}")]
    InvalidCursor(String),
}

enum Attempt {
    Transient(String),
    Fatal(String),
}

async fn get_once(client: &reqwest::Client, cursor: &FetchCursor) -> Result<Vec<u8>, Attempt> {
    let mut query = vec![("limit", cursor.page_size.to_string())];
    if let Some(key) = &cursor.last_session_key {
        query.push(("after", key.clone()));
    }
    let response = client
        .get(&cursor.endpoint_url)
        .query(&query)
        .send()
        .await
        .map_err(|e| Attempt::Transient(e.to_string()))?;
    let status = response.status();
    if status.is_server_error() || status == reqwest::StatusCode::TOO_MANY_REQUESTS {
        return Err(Attempt::Transient(format!("HTTP {status}")));
    }
    if !status.is_success() {
        return Err(Attempt::Fatal(format!("HTTP {status}")));
    }
    response
        .bytes()
        .await
        .map(|b| b.to_vec())
        .map_err(|e| Attempt::Transient(e.to_string()))
}

/// Fetches at most `page_size` sessions strictly after the cursor, using a
/// default client and retry policy.
pub async fn fetch_updates(cursor: &FetchCursor) -> Result<(Vec<RawSessionDoc>, FetchCursor), FetchError> {
    let client = reqwest::Client::builder()
        .timeout(Duration::from_secs(60))
        .build()
        .map_err(|e| FetchError::NetworkError {
            attempts: 0,
            message: e.to_string(),
        })?;
    fetch_updates_with(&client, cursor, RetryPolicy::default()).await
}

pub async fn fetch_updates_with(
    client: &reqwest::Client,
    cursor: &FetchCursor,
    retry: RetryPolicy,
) -> Result<(Vec<RawSessionDoc>, FetchCursor), FetchError> {
    if cursor.page_size == 0 || cursor.page_size > MAX_PAGE_SIZE {
        return Err(FetchError::InvalidCursor(format!(
            "page_size must be within 1..={MAX_PAGE_SIZE}, got {}",
            cursor.page_size
        )));
    }
    let attempts = retry.attempts.max(1);
    let mut delay = retry.base_delay;
    let mut last_error = String::new();
    let mut body = None;
    for attempt in 1..=attempts {
        match get_once(client, cursor).await {
            Ok(bytes) => {
                body = Some(bytes);
                break;
            }
            Err(Attempt::Fatal(message)) => {
                return Err(FetchError::NetworkError {
                    attempts: attempt,
                    message,
                })
            }
            Err(Attempt::Transient(message)) => {
                warn!(attempt, %message, "fetch attempt failed");
                last_error = message;
                if attempt < attempts {
                    tokio::time::sleep(delay).await;
                    delay *= 2;
                }
            }
        }
    }
    let body = body.ok_or(FetchError::NetworkError {
        attempts,
        message: last_error,
    })?;
    let mut docs = split_payload(&body, &cursor.endpoint_url)?;
    if let Some(last) = &cursor.last_session_key {
        docs.retain(|(key, _)| key > last);
    }
    docs.sort_by(|a, b| a.0.cmp(&b.0));
    docs.dedup_by(|a, b| a.0 == b.0);
    docs.truncate(cursor.page_size);
    debug!(count = docs.len(), "fetched sessions");

    let mut next = cursor.clone();
    if let Some((key, _)) = docs.last() {
        next.last_session_key = Some(key.clone());
    }
    Ok((docs.into_iter().map(|(_, doc)| doc).collect(), next))
}

/// Splits a response body into (session key, document) pairs.
fn split_payload(body: &[u8], endpoint: &str) -> Result<Vec<(String, RawSessionDoc)>, FetchError> {
    let root = xml::parse(body).map_err(|e| FetchError::RemoteFormatError(e.to_string()))?;
    let protocols: Vec<&xml::Element> = if root.name == ROOT {
        vec![&root]
    } else if root.name == "dokumente" {
        root.elements().filter(|e| e.name == ROOT).collect()
    } else {
        return Err(FetchError::RemoteFormatError(format!(
            "unexpected root element <{}>",
            root.name
        )));
    };
    protocols
        .into_iter()
        .map(|p| {
            let key = session_key(p).ok_or_else(|| {
                FetchError::RemoteFormatError(format!("line {}: protocol without wahlperiode/sitzung-nr", p.line))
            })?;
            let bytes = body[p.span.clone()].to_vec();
            let doc = RawSessionDoc::new(Schema::Bundestag, bytes, format!("{endpoint}#{key}"));
            Ok((key, doc))
        })
        .collect()
}
