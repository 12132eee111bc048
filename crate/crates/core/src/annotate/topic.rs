//! Keyword-scoring topic classifier used in place of a trained model.

use std::collections::BTreeMap;

use serde::Deserialize;
use unicode_segmentation::UnicodeSegmentation;

use super::{AnnotateError, Annotator, AnnotatorKind, AnnotatorOutput};
use crate::fold::german_fold;
use crate::model::{SpeechContribution, TopicLabel, TopicVocabulary, PRESIDENCY_ACTION};

#[derive(Debug, Deserialize)]
struct KeywordFile {
    fallback: String,
    keywords: BTreeMap<String, Vec<String>>,
}

/// Scores each topic by the number of folded tokens starting with one of its
/// stems (stems shorter than four characters must match exactly). The best
/// topic wins, ties go to the earlier topic in vocabulary order, and a text
/// without hits gets the fallback topic with confidence 0.
#[derive(Debug, Clone)]
pub struct KeywordTopicClassifier {
    id: String,
    topics: Vec<(String, Vec<String>)>,
    fallback: String,
}

impl KeywordTopicClassifier {
    pub const DEFAULT_SOURCE: &'static str = include_str!("../../config/topic_keywords.json");

    pub fn from_json(id: impl Into<String>, source: &str, vocabulary: &TopicVocabulary) -> Result<Self, String> {
        let file: KeywordFile = serde_json::from_str(source).map_err(|e| e.to_string())?;
        if !vocabulary.contains(&file.fallback) || file.fallback == PRESIDENCY_ACTION {
            return Err(format!("fallback {:?} is not a domain topic", file.fallback));
        }
        if let Some(unknown) = file
            .keywords
            .keys()
            .find(|k| !vocabulary.contains(k) || *k == PRESIDENCY_ACTION)
        {
            return Err(format!("keywords given for unknown topic {unknown:?}"));
        }
        let topics = vocabulary
            .domain_topics()
            .map(|t| {
                let stems = file
                    .keywords
                    .get(t)
                    .map(|ks| ks.iter().map(|k| german_fold(k)).collect())
                    .unwrap_or_default();
                (t.to_string(), stems)
            })
            .collect();
        Ok(Self {
            id: id.into(),
            topics,
            fallback: file.fallback,
        })
    }

    pub fn stub() -> Self {
        Self::from_json("topic-stub", Self::DEFAULT_SOURCE, &TopicVocabulary::default())
            .expect("shipped keyword table is valid")
    }

    pub fn classify(&self, text: &str) -> TopicLabel {
        let tokens: Vec<String> = text.unicode_words().map(german_fold).collect();
        let scores: Vec<usize> = self
            .topics
            .iter()
            .map(|(_, stems)| {
                tokens
                    .iter()
                    .filter(|tok| {
                        stems.iter().any(|s| {
                            if s.chars().count() < 4 {
                                *tok == s
                            } else {
                                tok.starts_with(s.as_str())
                            }
                        })
                    })
                    .count()
            })
            .collect();
        let total: usize = scores.iter().sum();
        // max_by_key keeps the last maximum, so scan in reverse for the first.
        let best = scores
            .iter()
            .enumerate()
            .rev()
            .max_by_key(|(_, &s)| s)
            .map(|(i, &s)| (i, s));
        match best {
            Some((i, score)) if score > 0 => TopicLabel {
                label: self.topics[i].0.clone(),
                confidence: score as f64 / total as f64,
            },
            _ => TopicLabel {
                label: self.fallback.clone(),
                confidence: 0.0,
            },
        }
    }
}

impl Annotator for KeywordTopicClassifier {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AnnotatorKind {
        AnnotatorKind::Topic
    }

    fn annotate(&self, record: &SpeechContribution) -> Result<AnnotatorOutput, AnnotateError> {
        Ok(AnnotatorOutput::Topic(self.classify(&record.text)))
    }
}
