//! Deterministic gazetteer-based entity tagger used as a stand-in for
//! statistical NER models.

use std::collections::HashMap;

use super::{AnnotateError, Annotator, AnnotatorKind, AnnotatorOutput};
use crate::model::{SpanAnnotation, SpanKind, SpeechContribution};

#[derive(Debug, Clone)]
struct Entry {
    surface: Vec<char>,
    label: String,
}

/// Longest-match lookup of surface forms at word boundaries.
#[derive(Debug, Clone)]
pub struct GazetteerNer {
    id: String,
    by_first: HashMap<char, Vec<Entry>>,
}

impl GazetteerNer {
    pub const GERMAN_SOURCE: &'static str = include_str!("../../config/gazetteer_ner_german.tsv");
    pub const LEGAL_SOURCE: &'static str = include_str!("../../config/gazetteer_ner_german_legal.tsv");

    /// Parses `surface<TAB>label` lines; `#` comments and blank lines are skipped.
    pub fn from_tsv(id: impl Into<String>, source: &str) -> Result<Self, String> {
        let mut by_first: HashMap<char, Vec<Entry>> = HashMap::new();
        for (i, line) in source.lines().enumerate() {
            let line = line.trim_end();
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, label) = line
                .split_once('\t')
                .ok_or_else(|| format!("line {}: expected surface<TAB>label", i + 1))?;
            let surface: Vec<char> = surface.trim().chars().collect();
            let Some(&first) = surface.first() else {
                return Err(format!("line {}: empty surface form", i + 1));
            };
            by_first.entry(first).or_default().push(Entry {
                surface,
                label: label.trim().to_string(),
            });
        }
        for entries in by_first.values_mut() {
            entries.sort_by(|a, b| {
                b.surface
                    .len()
                    .cmp(&a.surface.len())
                    .then_with(|| a.surface.cmp(&b.surface))
            });
        }
        Ok(Self {
            id: id.into(),
            by_first,
        })
    }

    pub fn german() -> Self {
        Self::from_tsv("ner-german", Self::GERMAN_SOURCE).expect("shipped gazetteer is valid")
    }

    pub fn german_legal() -> Self {
        Self::from_tsv("ner-german-legal", Self::LEGAL_SOURCE).expect("shipped gazetteer is valid")
    }

    pub fn tag(&self, text: &str) -> Vec<SpanAnnotation> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let at_boundary = i == 0 || !chars[i - 1].is_alphanumeric();
            let hit = at_boundary
                .then(|| self.by_first.get(&chars[i]))
                .flatten()
                .and_then(|entries| {
                    entries.iter().find(|e| {
                        let end = i + e.surface.len();
                        end <= n && chars[i..end] == e.surface[..] && (end == n || !chars[end].is_alphanumeric())
                    })
                });
            match hit {
                Some(e) => {
                    let end = i + e.surface.len();
                    out.push(SpanAnnotation::new(
                        SpanKind::NerEntity,
                        i,
                        end,
                        e.label.clone(),
                        self.id.clone(),
                    ));
                    i = end;
                }
                None => i += 1,
            }
        }
        out
    }
}

impl Annotator for GazetteerNer {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AnnotatorKind {
        AnnotatorKind::Ner
    }

    fn annotate(&self, record: &SpeechContribution) -> Result<AnnotatorOutput, AnnotateError> {
        Ok(AnnotatorOutput::Spans(self.tag(&record.text)))
    }
}
