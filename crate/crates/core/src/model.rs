//! Unified speech-contribution schema shared by every pipeline stage.
//!
//! The serde representation of [`SpeechContribution`] is the canonical export
//! record: the JSON-lines files passed between stages, the export bundle and
//! the detail endpoint all use it.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

/// JSON Schema (draft-07) of the export bundle and its records.
pub const EXPORT_SCHEMA: &str = include_str!("../config/export.schema.json");

/// Label reserved for contributions of the presiding officer.
pub const PRESIDENCY_ACTION: &str = "PresidencyAction";

/// One speaker's contribution within a plenary session. The atomic search document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeechContribution {
    pub id: String,
    pub legislative_period: u32,
    pub session_number: u32,
    /// 0 when the contribution is not attached to an agenda item.
    pub agenda_number: u32,
    pub agenda_type: String,
    pub agenda_description: String,
    pub date: NaiveDate,
    pub speaker: SpeakerRef,
    pub role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic: Option<TopicLabel>,
    pub source_uri: String,
    pub text: String,
    pub sentences: Vec<Sentence>,
    pub annotations: Vec<SpanAnnotation>,
}

impl SpeechContribution {
    /// Length of `text` in code points, the unit of every offset.
    pub fn text_len(&self) -> usize {
        self.text.chars().count()
    }

    /// Substring of `text` between two code-point offsets.
    pub fn slice(&self, start: usize, end: usize) -> String {
        slice_chars(&self.text, start, end)
    }

    pub fn has_call_to_order(&self) -> bool {
        self.annotations.iter().any(|a| a.kind == SpanKind::CallToOrder)
    }

    pub fn has_interjection(&self) -> bool {
        self.annotations.iter().any(|a| a.kind == SpanKind::Interjection)
    }
}

/// Code-point slice of `text`; out-of-range bounds are clamped.
pub fn slice_chars(text: &str, start: usize, end: usize) -> String {
    text.chars().skip(start).take(end.saturating_sub(start)).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeakerRef {
    pub raw_name: String,
    pub first_name: String,
    pub surname: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_mp_id: Option<String>,
    pub party: PartyRef,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub ambiguous: bool,
}

impl SpeakerRef {
    pub fn display_name(&self) -> &str {
        &self.raw_name
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyRef {
    /// Party string exactly as found in the source.
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canonical: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    President,
    Member,
    Government,
    Guest,
    Unknown,
}

impl Role {
    pub const ALL: [Role; 5] = [
        Role::President,
        Role::Member,
        Role::Government,
        Role::Guest,
        Role::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::President => "president",
            Role::Member => "member",
            Role::Government => "government",
            Role::Guest => "guest",
            Role::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sentence {
    pub index: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpanKind {
    Interjection,
    CallToOrder,
    NerEntity,
    PartyMention,
}

impl SpanKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SpanKind::Interjection => "interjection",
            SpanKind::CallToOrder => "call_to_order",
            SpanKind::NerEntity => "ner_entity",
            SpanKind::PartyMention => "party_mention",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpanAnnotation {
    pub kind: SpanKind,
    pub start: usize,
    pub end: usize,
    /// Entity class for `ner_entity`, canonical party id for `party_mention`, empty otherwise.
    pub label: String,
    pub annotator: String,
}

impl SpanAnnotation {
    pub fn new(
        kind: SpanKind,
        start: usize,
        end: usize,
        label: impl Into<String>,
        annotator: impl Into<String>,
    ) -> Self {
        Self {
            kind,
            start,
            end,
            label: label.into(),
            annotator: annotator.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopicLabel {
    pub label: String,
    pub confidence: f64,
}

impl TopicLabel {
    pub fn presidency() -> Self {
        Self {
            label: PRESIDENCY_ACTION.to_string(),
            confidence: 1.0,
        }
    }
}

/// Deterministic contribution id: `{period}-{session}-{agenda}-{seq}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ContributionId {
    pub period: u32,
    pub session: u32,
    pub agenda: u32,
    /// 1-based position of the contribution within the session transcript.
    pub seq: u32,
}

impl fmt::Display for ContributionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}-{}", self.period, self.session, self.agenda, self.seq)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed contribution id {0:?}")]
pub struct ParseIdError(pub String);

impl FromStr for ContributionId {
    type Err = ParseIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseIdError(s.to_string());
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 4 {
            return Err(err());
        }
        let num = |p: &str| p.parse::<u32>().map_err(|_| err());
        Ok(Self {
            period: num(parts[0])?,
            session: num(parts[1])?,
            agenda: num(parts[2])?,
            seq: num(parts[3])?,
        })
    }
}

/// Closed topic vocabulary shipped as configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicVocabulary {
    labels: Vec<String>,
}

impl TopicVocabulary {
    pub const DEFAULT_SOURCE: &'static str = include_str!("../config/topics.txt");
    /// Number of labels: the policy topics plus the presidency label.
    pub const SIZE: usize = 22;

    pub fn parse(source: &str) -> Result<Self, String> {
        let labels: Vec<String> = source
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect();
        if labels.len() != Self::SIZE {
            return Err(format!(
                "topic vocabulary must hold {} labels, found {}",
                Self::SIZE,
                labels.len()
            ));
        }
        if !labels.iter().any(|l| l == PRESIDENCY_ACTION) {
            return Err(format!("topic vocabulary lacks {PRESIDENCY_ACTION}"));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(format!("duplicate topic label {dup:?}"));
        }
        Ok(Self { labels })
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// The policy topics, i.e. everything except the presidency label.
    pub fn domain_topics(&self) -> impl Iterator<Item = &str> {
        self.labels
            .iter()
            .map(String::as_str)
            .filter(|l| *l != PRESIDENCY_ACTION)
    }
}

impl Default for TopicVocabulary {
    fn default() -> Self {
        Self::parse(Self::DEFAULT_SOURCE).expect("shipped topic vocabulary is valid")
    }
}
