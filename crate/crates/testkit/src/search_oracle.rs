//! Naive full-scan evaluation of boolean queries and a random query generator.

use chrono::NaiveDate;
use plenum_core::index::{Clause, Field, Op, Query};
use plenum_core::model::{SpanKind, SpeechContribution};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::corpus::{RAW_PARTIES, SPEAKERS, WORDS};
use crate::tokens;

/// One document's searchable views, precomputed.
pub struct ScanDoc<'a> {
    pub record: &'a SpeechContribution,
    text: Vec<String>,
    speaker: Vec<String>,
    party: Vec<Vec<String>>,
    topic: Vec<String>,
}

impl<'a> ScanDoc<'a> {
    pub fn new(record: &'a SpeechContribution) -> Self {
        let mut party = vec![tokens(&record.speaker.party.raw)];
        if let Some(c) = &record.speaker.party.canonical {
            party.push(tokens(c));
        }
        Self {
            record,
            text: tokens(&record.text),
            speaker: tokens(&record.speaker.raw_name),
            party,
            topic: record.topic.as_ref().map(|t| tokens(&t.label)).unwrap_or_default(),
        }
    }
}

fn contains_run(hay: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Quoted value: contiguous run inside one stored value. Otherwise every
/// token must appear somewhere in the field.
fn text_match(values: &[&[String]], value: &str) -> bool {
    let v = value.trim();
    if v.len() >= 2 && v.starts_with('"') && v.ends_with('"') {
        let needle = tokens(&v[1..v.len() - 1]);
        values.iter().any(|hay| contains_run(hay, &needle))
    } else {
        let needle = tokens(v);
        !needle.is_empty() && needle.iter().all(|t| values.iter().any(|hay| hay.contains(t)))
    }
}

fn date_match(date: NaiveDate, value: &str) -> bool {
    let p = |s: &str| NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").ok();
    let (a, b) = match value.split_once("..") {
        Some((a, b)) => (p(a), p(b)),
        None => (p(value), p(value)),
    };
    matches!((a, b), (Some(a), Some(b)) if a <= date && date <= b)
}

fn num_match(n: u32, value: &str) -> bool {
    value.trim().parse::<u32>().is_ok_and(|v| v == n)
}

fn flag_match(b: bool, value: &str) -> bool {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" => b,
        "false" => !b,
        _ => false,
    }
}

pub fn field_match(d: &ScanDoc, field: Field, value: &str) -> bool {
    let r = d.record;
    match field {
        Field::FullText => text_match(&[&d.text], value),
        Field::Speaker => text_match(&[&d.speaker], value),
        Field::Party => {
            let views: Vec<&[String]> = d.party.iter().map(Vec::as_slice).collect();
            text_match(&views, value)
        }
        Field::Topic => text_match(&[&d.topic], value),
        Field::LegislativePeriod => num_match(r.legislative_period, value),
        Field::SessionNumber => num_match(r.session_number, value),
        Field::AgendaNumber => num_match(r.agenda_number, value),
        Field::Role => r.role.as_str() == value.trim().to_lowercase(),
        Field::Date => date_match(r.date, value),
        Field::HasCallToOrder => flag_match(r.annotations.iter().any(|a| a.kind == SpanKind::CallToOrder), value),
        Field::HasInterjection => flag_match(r.annotations.iter().any(|a| a.kind == SpanKind::Interjection), value),
        Field::All => Field::SELECTORS.iter().any(|&f| field_match(d, f, value)),
    }
}

/// Per-document boolean fold over the clauses.
pub fn doc_matches(d: &ScanDoc, clauses: &[Clause]) -> bool {
    let Some((first, rest)) = clauses.split_first() else {
        return true;
    };
    rest.iter().fold(field_match(d, first.field, &first.value), |acc, c| {
        let m = field_match(d, c.field, &c.value);
        match c.op {
            Op::And => acc && m,
            Op::Or => acc || m,
            Op::Not => acc && !m,
        }
    })
}

/// Ids of all matching documents, sorted.
pub fn scan(docs: &[ScanDoc], q: &Query) -> Vec<String> {
    let mut ids: Vec<String> = docs
        .iter()
        .filter(|d| doc_matches(d, &q.clauses))
        .map(|d| d.record.id.clone())
        .collect();
    ids.sort();
    ids
}

fn random_word(rng: &mut impl Rng) -> String {
    let w = WORDS.choose(rng).unwrap();
    match rng.gen_range(0..4) {
        0 => w.to_uppercase(),
        1 => w.to_lowercase(),
        _ => w.to_string(),
    }
}

fn phrase_from(rng: &mut impl Rng, docs: &[SpeechContribution]) -> String {
    let d = docs.choose(rng).unwrap();
    let words: Vec<&str> = d.text.split_whitespace().collect();
    let len = rng.gen_range(2..=3).min(words.len());
    let start = rng.gen_range(0..=words.len() - len);
    format!("\"{}\"", words[start..start + len].join(" "))
}

pub fn random_value(rng: &mut impl Rng, field: Field, docs: &[SpeechContribution]) -> String {
    match field {
        Field::FullText => match rng.gen_range(0..6) {
            0..=2 => random_word(rng),
            3 => format!("{} {}", random_word(rng), random_word(rng)),
            4 => phrase_from(rng, docs),
            _ => "Zeppelin".into(),
        },
        Field::Speaker => {
            let (f, s) = SPEAKERS.choose(rng).unwrap();
            match rng.gen_range(0..3) {
                0 => s.to_string(),
                1 => format!("\"{f} {s}\""),
                _ => format!("{} {}", s.to_lowercase(), f),
            }
        }
        Field::Party => {
            let p = RAW_PARTIES.choose(rng).unwrap();
            match p {
                &"" => "GRÜNE".into(),
                p if rng.gen_bool(0.3) => format!("\"{p}\""),
                p => p.to_string(),
            }
        }
        Field::Topic => [
            "Health",
            "Environment",
            "\"Law and Crime\"",
            "PresidencyAction",
            "Energy",
            "crime",
        ]
        .choose(rng)
        .unwrap()
        .to_string(),
        Field::LegislativePeriod => rng.gen_range(1..=21).to_string(),
        Field::SessionNumber => rng.gen_range(1..=42).to_string(),
        Field::AgendaNumber => rng.gen_range(0..=13).to_string(),
        Field::Role => ["president", "member", "government", "guest", "unknown", "Member"]
            .choose(rng)
            .unwrap()
            .to_string(),
        Field::HasCallToOrder | Field::HasInterjection => ["true", "false"].choose(rng).unwrap().to_string(),
        Field::Date => {
            let d = docs.choose(rng).unwrap().date;
            if rng.gen_bool(0.4) {
                d.to_string()
            } else {
                let end = d + chrono::Duration::days(rng.gen_range(0..2000));
                format!("{d}..{end}")
            }
        }
        Field::All => {
            let f = *Field::SELECTORS.choose(rng).unwrap();
            random_value(rng, f, docs)
        }
    }
}

/// A random valid query with up to `max_clauses` clauses (possibly none).
pub fn random_query(rng: &mut impl Rng, docs: &[SpeechContribution], max_clauses: usize) -> Query {
    let n = rng.gen_range(0..=max_clauses);
    let clauses = (0..n)
        .map(|_| {
            let op = *[Op::And, Op::Or, Op::Not].choose(rng).unwrap();
            let field = if rng.gen_ratio(1, 12) {
                Field::All
            } else {
                *Field::SELECTORS.choose(rng).unwrap()
            };
            Clause::new(op, field, random_value(rng, field, docs))
        })
        .collect();
    Query::new(clauses)
}
