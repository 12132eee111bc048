//! Hand-labelled call-to-order snippets from `fixtures/cto_snippets.json`.

use chrono::NaiveDate;
use plenum_core::model::{Role, SpanAnnotation, SpanKind, SpeakerRef, SpeechContribution};
use plenum_core::segment::segment;
use serde_json::Value;

pub struct Snippet {
    pub id: String,
    pub record: SpeechContribution,
    /// Sentences a correct detector marks, in text order.
    pub expected: Vec<String>,
}

fn role(s: &str) -> Role {
    match s {
        "president" => Role::President,
        "member" => Role::Member,
        "government" => Role::Government,
        "guest" => Role::Guest,
        other => panic!("unknown role {other}"),
    }
}

pub fn load() -> Vec<Snippet> {
    let raw = std::fs::read_to_string(crate::fixture("cto_snippets.json")).unwrap();
    let items: Vec<Value> = serde_json::from_str(&raw).unwrap();
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let text = item["text"].as_str().unwrap().to_string();
            let annotations = item["interjections"]
                .as_array()
                .unwrap()
                .iter()
                .map(|p| {
                    let s = p[0].as_u64().unwrap() as usize;
                    let e = p[1].as_u64().unwrap() as usize;
                    SpanAnnotation::new(SpanKind::Interjection, s, e, "", "fixture")
                })
                .collect();
            let record = SpeechContribution {
                id: format!("19-1-1-{}", i + 1),
                legislative_period: 19,
                session_number: 1,
                agenda_number: 1,
                agenda_type: "Tagesordnungspunkt".into(),
                agenda_description: String::new(),
                date: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
                speaker: SpeakerRef {
                    raw_name: "Test Person".into(),
                    first_name: "Test".into(),
                    surname: "Person".into(),
                    ..Default::default()
                },
                role: role(item["role"].as_str().unwrap()),
                topic: None,
                source_uri: "fixture://cto".into(),
                sentences: segment(&text),
                text,
                annotations,
            };
            Snippet {
                id: item["id"].as_str().unwrap().to_string(),
                record,
                expected: item["expected"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|v| v.as_str().unwrap().to_string())
                    .collect(),
            }
        })
        .collect()
}
