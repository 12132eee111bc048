//! Rule-based call-to-order detection over president contributions.

use regex::{Regex, RegexBuilder};
use serde::Deserialize;

use crate::model::{Role, SpanAnnotation, SpanKind, SpeechContribution};
use crate::segment;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuleSetError {
    #[error("invalid rule set JSON: {0}")]
    Json(String),
    #[error("rule {id}: {message}")]
    Pattern { id: String, message: String },
    #[error("duplicate rule id {0}")]
    DuplicateId(String),
}

#[derive(Debug, Deserialize)]
struct RuleFile {
    version: String,
    rules: Vec<RuleEntry>,
}

#[derive(Debug, Deserialize)]
struct RuleEntry {
    id: String,
    pattern: String,
}

#[derive(Debug, Clone)]
pub struct CtoRule {
    pub rule_id: String,
    pub pattern: Regex,
}

/// Ordered, versioned call-to-order rules. Patterns are case-insensitive and
/// `.` also matches newlines.
#[derive(Debug, Clone)]
pub struct CtoRuleSet {
    pub version: String,
    pub rules: Vec<CtoRule>,
}

impl CtoRuleSet {
    pub const DEFAULT_SOURCE: &'static str = include_str!("../../config/cto_rules.json");

    pub fn new(version: impl Into<String>, rules: &[(&str, &str)]) -> Result<Self, RuleSetError> {
        let mut out = Self {
            version: version.into(),
            rules: Vec::with_capacity(rules.len()),
        };
        for (id, pattern) in rules {
            if out.rules.iter().any(|r| r.rule_id == *id) {
                return Err(RuleSetError::DuplicateId(id.to_string()));
            }
            let pattern = RegexBuilder::new(pattern)
                .case_insensitive(true)
                .dot_matches_new_line(true)
                .build()
                .map_err(|e| RuleSetError::Pattern {
                    id: id.to_string(),
                    message: e.to_string(),
                })?;
            out.rules.push(CtoRule {
                rule_id: id.to_string(),
                pattern,
            });
        }
        Ok(out)
    }

    pub fn from_json(source: &str) -> Result<Self, RuleSetError> {
        let file: RuleFile = serde_json::from_str(source).map_err(|e| RuleSetError::Json(e.to_string()))?;
        let rules: Vec<(&str, &str)> = file.rules.iter().map(|r| (r.id.as_str(), r.pattern.as_str())).collect();
        Self::new(file.version, &rules)
    }

    /// Id of the first rule matching `sentence`.
    pub fn first_match(&self, sentence: &str) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| r.pattern.is_match(sentence))
            .map(|r| r.rule_id.as_str())
    }
}

impl Default for CtoRuleSet {
    fn default() -> Self {
        Self::from_json(Self::DEFAULT_SOURCE).expect("shipped rule set is valid")
    }
}

/// One call-to-order span per matching sentence of a president contribution.
///
/// Sentences lying entirely inside an interjection span are skipped, since
/// those words are not the president's. Records without sentences are
/// segmented on the fly.
pub fn detect_calls_to_order(record: &SpeechContribution, rules: &CtoRuleSet) -> Vec<SpanAnnotation> {
    if record.role != Role::President {
        return Vec::new();
    }
    let owned;
    let sentences = if record.sentences.is_empty() {
        owned = segment::segment(&record.text);
        &owned
    } else {
        &record.sentences
    };
    let interjections: Vec<(usize, usize)> = record
        .annotations
        .iter()
        .filter(|a| a.kind == SpanKind::Interjection)
        .map(|a| (a.start, a.end))
        .collect();
    sentences
        .iter()
        .filter(|s| !interjections.iter().any(|&(a, b)| a <= s.start && s.end <= b))
        .filter(|s| rules.first_match(&record.slice(s.start, s.end)).is_some())
        .map(|s| SpanAnnotation::new(SpanKind::CallToOrder, s.start, s.end, "", rules.version.clone()))
        .collect()
}
