//! The XML fixtures run through the full pipeline, and a tiny hand-made corpus.

use chrono::NaiveDate;
use plenum_core::ingest::{RawSessionDoc, Schema};
use plenum_core::model::{PartyRef, Role, SpeakerRef, SpeechContribution, TopicLabel};
use plenum_core::pipeline::{self, PipelineConfig};
use plenum_core::resolve::ResolutionTables;
use plenum_core::segment::segment;

use crate::fixture;

pub const XML_FIXTURES: [(Schema, &str); 4] = [
    (Schema::Germaparl, "germaparl/19-183.xml"),
    (Schema::Germaparl, "germaparl/19-184.xml"),
    (Schema::Bundestag, "bundestag/19-183.xml"),
    (Schema::Bundestag, "bundestag/20-012.xml"),
];

pub fn raw_doc(schema: Schema, rel: &str) -> RawSessionDoc {
    RawSessionDoc::new(schema, std::fs::read(fixture(rel)).unwrap(), rel)
}

pub fn xml_docs() -> Vec<RawSessionDoc> {
    XML_FIXTURES.iter().map(|&(s, rel)| raw_doc(s, rel)).collect()
}

pub fn mp_tables() -> ResolutionTables {
    let csv = std::fs::File::open(fixture("mps.csv")).unwrap();
    ResolutionTables::from_csv(csv, Default::default(), Default::default()).unwrap()
}

pub fn pipeline_config() -> PipelineConfig {
    PipelineConfig {
        tables: Some(mp_tables()),
        ..Default::default()
    }
}

/// Every XML fixture ingested, segmented, annotated and resolved.
pub fn pipeline_records() -> Vec<SpeechContribution> {
    pipeline::run(&xml_docs(), &pipeline_config()).unwrap()
}

fn small(id: &str, period: u32, date: &str, party: &str, topic: Option<&str>, text: &str) -> SpeechContribution {
    SpeechContribution {
        id: id.into(),
        legislative_period: period,
        session_number: 1,
        agenda_number: 1,
        agenda_type: "Tagesordnungspunkt".into(),
        agenda_description: String::new(),
        date: date.parse::<NaiveDate>().unwrap(),
        speaker: SpeakerRef {
            raw_name: "Angela Merkel".into(),
            first_name: "Angela".into(),
            surname: "Merkel".into(),
            party: PartyRef {
                raw: party.into(),
                canonical: Some(party.into()),
            },
            ..Default::default()
        },
        role: Role::Member,
        topic: topic.map(|t| TopicLabel {
            label: t.into(),
            confidence: 1.0,
        }),
        source_uri: "fixture://small".into(),
        sentences: segment(text),
        text: text.into(),
        annotations: Vec::new(),
    }
}

/// Five records over periods {19, 19, 20, 1, 3}.
pub fn five_records() -> Vec<SpeechContribution> {
    vec![
        small(
            "19-1-1-1",
            19,
            "2018-01-10",
            "CDU",
            Some("Environment"),
            "Der Klimawandel ist real. Migration auch.",
        ),
        small(
            "19-1-1-2",
            19,
            "2018-01-11",
            "SPD",
            Some("Immigration"),
            "Migration und Klimawandel, Klimawandel!",
        ),
        small(
            "20-1-1-1",
            20,
            "2022-01-10",
            "CDU",
            Some("Immigration"),
            "Über Migration reden wir.",
        ),
        small("1-1-1-1", 1, "1950-01-10", "FDP", None, "Die Sitzung ist eröffnet."),
        small(
            "3-1-1-1",
            3,
            "1958-01-10",
            "SPD",
            Some("Immigration"),
            "Wir reden über Migration.",
        ),
    ]
}
