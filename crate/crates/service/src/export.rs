//! Subcorpus export bundles.
//!
//! A bundle is one compact JSON document:
//! `{"format_version":1,"query":…,"generated_at":…,"records":[…]}` with a
//! trailing `"truncated":true` when the result was cut at the cap. It is
//! produced piecewise so the HTTP handler can stream it; writing the pieces
//! in order yields the same bytes as [`write_bundle`].

use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, Utc};
use plenum_core::index::{IndexError, IndexSnapshot, Query};
use plenum_core::model::SpeechContribution;
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportBundle {
    pub format_version: u32,
    pub query: Query,
    pub generated_at: String,
    pub records: Vec<SpeechContribution>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub truncated: bool,
}

impl ExportBundle {
    pub fn from_reader(r: impl Read) -> Result<Self, serde_json::Error> {
        serde_json::from_reader(r)
    }
}

pub fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error(transparent)]
    Query(#[from] IndexError),
    #[error("cap must be within 1..={max}, got {cap}")]
    BadCap { cap: usize, max: usize },
    #[error("query matches {total} records, more than the cap of {cap}")]
    CapExceeded { total: usize, cap: usize },
}

/// Which documents an export contains, in result order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPlan {
    pub ids: Vec<String>,
    pub total: usize,
    pub truncated: bool,
}

/// Ranks `query` ignoring pagination and applies the cap.
pub fn plan(
    index: &IndexSnapshot,
    query: &Query,
    cap: usize,
    max_cap: usize,
    truncate: bool,
) -> Result<ExportPlan, ExportError> {
    if cap == 0 || cap > max_cap {
        return Err(ExportError::BadCap { cap, max: max_cap });
    }
    query.check()?;
    let hits = index.ranked(query)?;
    let total = hits.len();
    if total > cap && !truncate {
        return Err(ExportError::CapExceeded { total, cap });
    }
    Ok(ExportPlan {
        ids: hits.into_iter().take(cap).map(|h| h.id).collect(),
        total,
        truncated: total > cap,
    })
}

pub fn head(query: &Query, generated_at: &str) -> Vec<u8> {
    let mut out = format!("{{\"format_version\":{FORMAT_VERSION},\"query\":").into_bytes();
    serde_json::to_writer(&mut out, query).expect("queries serialize");
    out.extend_from_slice(b",\"generated_at\":");
    serde_json::to_writer(&mut out, generated_at).expect("strings serialize");
    out.extend_from_slice(b",\"records\":[");
    out
}

pub fn record(r: &SpeechContribution, first: bool) -> Vec<u8> {
    let mut out = if first { Vec::new() } else { vec![b','] };
    serde_json::to_writer(&mut out, r).expect("records serialize");
    out
}

pub fn tail(truncated: bool) -> Vec<u8> {
    if truncated {
        b"],\"truncated\":true}".to_vec()
    } else {
        b"]}".to_vec()
    }
}

pub fn write_bundle(
    mut w: impl Write,
    index: &IndexSnapshot,
    query: &Query,
    plan: &ExportPlan,
    generated_at: &str,
) -> std::io::Result<()> {
    w.write_all(&head(query, generated_at))?;
    for (i, id) in plan.ids.iter().enumerate() {
        let r = index.get(id).expect("planned ids exist in the snapshot");
        w.write_all(&record(r, i == 0))?;
    }
    w.write_all(&tail(plan.truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use plenum_core::build_index;
    use plenum_core::index::{Clause, Field, Op};
    use plenum_testkit::corpus::CorpusGen;

    #[test]
    fn pieces_form_a_parseable_bundle() {
        let index = build_index(CorpusGen::new(1).corpus(30)).unwrap();
        let q = Query::new(vec![Clause::new(Op::And, Field::Role, "president")]);
        let p = plan(&index, &q, 100, 100, false).unwrap();
        let mut buf = Vec::new();
        write_bundle(&mut buf, &index, &q, &p, "2024-01-01T00:00:00Z").unwrap();
        let bundle = ExportBundle::from_reader(buf.as_slice()).unwrap();
        assert_eq!(bundle.records.len(), p.total);
        assert!(!bundle.truncated);
        assert_eq!(serde_json::to_vec(&bundle).unwrap(), buf);
    }

    #[test]
    fn cap_rules() {
        let index = build_index(CorpusGen::new(2).corpus(30)).unwrap();
        let q = Query::default();
        assert!(matches!(
            plan(&index, &q, 5, 100, false),
            Err(ExportError::CapExceeded { total: 30, cap: 5 })
        ));
        assert!(matches!(
            plan(&index, &q, 101, 100, true),
            Err(ExportError::BadCap { .. })
        ));
        assert!(matches!(
            plan(&index, &q, 0, 100, true),
            Err(ExportError::BadCap { .. })
        ));
        let p = plan(&index, &q, 5, 100, true).unwrap();
        assert_eq!((p.ids.len(), p.total, p.truncated), (5, 30, true));
        let p = plan(&index, &q, 30, 100, false).unwrap();
        assert!(!p.truncated);
    }

    #[test]
    fn timestamps_use_utc_designator() {
        let t = DateTime::parse_from_rfc3339("2024-05-06T07:08:09+02:00")
            .unwrap()
            .with_timezone(&Utc);
        assert_eq!(timestamp(t), "2024-05-06T05:08:09Z");
    }
}
