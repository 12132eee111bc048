//! Conversion of the two raw transcript schemas into unified records.

mod bundestag;
pub mod fetch;
mod germaparl;
mod text;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bundestag::{parse_bundestag, ANNOTATOR as BUNDESTAG_ANNOTATOR};
pub use fetch::{fetch_updates, FetchCursor, FetchError, RetryPolicy};
pub use germaparl::{parse_germaparl, ANNOTATOR as GERMAPARL_ANNOTATOR};

use crate::model::SpeechContribution;
use crate::xml::{self, Element};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Germaparl,
    Bundestag,
}

impl Schema {
    pub fn as_str(self) -> &'static str {
        match self {
            Schema::Germaparl => "germaparl",
            Schema::Bundestag => "bundestag",
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "germaparl" => Ok(Schema::Germaparl),
            "bundestag" => Ok(Schema::Bundestag),
            other => Err(format!("unknown schema {other:?} (expected germaparl or bundestag)")),
        }
    }
}

/// One raw session transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawSessionDoc {
    pub schema: Schema,
    pub xml_bytes: Vec<u8>,
    pub source_uri: String,
}

impl RawSessionDoc {
    pub fn new(schema: Schema, xml_bytes: impl Into<Vec<u8>>, source_uri: impl Into<String>) -> Self {
        Self {
            schema,
            xml_bytes: xml_bytes.into(),
            source_uri: source_uri.into(),
        }
    }

    pub(crate) fn parse_xml(&self) -> Result<Element, IngestError> {
        xml::parse(&self.xml_bytes).map_err(|e| IngestError::MalformedXml {
            source_uri: self.source_uri.clone(),
            line: e.line,
            message: e.message,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngestError {
    #[error("{source_uri}:{line}: malformed XML: {message}")]
    MalformedXml {
        source_uri: String,
        line: usize,
        message: String,
    },
    #[error("{source_uri}:{line}: <{element}>: {message}")]
    SchemaMismatch {
        source_uri: String,
        line: usize,
        element: String,
        message: String,
    },
}

impl IngestError {
    pub(crate) fn schema(doc: &RawSessionDoc, line: usize, element: &str, message: impl Into<String>) -> Self {
        IngestError::SchemaMismatch {
            source_uri: doc.source_uri.clone(),
            line,
            element: element.to_string(),
            message: message.into(),
        }
    }
}

/// Parses a document with the pipeline of its declared schema.
pub fn parse(doc: &RawSessionDoc) -> Result<Vec<SpeechContribution>, IngestError> {
    match doc.schema {
        Schema::Germaparl => parse_germaparl(doc),
        Schema::Bundestag => parse_bundestag(doc),
    }
}

/// Records of one parsed session, tagged with the schema they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSession {
    pub schema: Schema,
    pub period: u32,
    pub session: u32,
    pub records: Vec<SpeechContribution>,
}

impl ParsedSession {
    /// None for a session without any turns.
    pub fn from_records(schema: Schema, records: Vec<SpeechContribution>) -> Option<Self> {
        let first = records.first()?;
        Some(Self {
            schema,
            period: first.legislative_period,
            session: first.session_number,
            records,
        })
    }
}

/// Drops sessions supplied by both sources, keyed by (period, session).
/// The bundestag copy wins; among copies from the same source the first wins.
/// Output is ordered by key.
pub fn dedup_sessions(sessions: Vec<ParsedSession>) -> Vec<ParsedSession> {
    let mut by_key: std::collections::BTreeMap<(u32, u32), ParsedSession> = std::collections::BTreeMap::new();
    for s in sessions {
        match by_key.entry((s.period, s.session)) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(s);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                if o.get().schema == Schema::Germaparl && s.schema == Schema::Bundestag {
                    o.insert(s);
                }
            }
        }
    }
    by_key.into_values().collect()
}
