//! Record validation against the corpus-model invariants.

use std::fmt;
use std::sync::OnceLock;

use crate::calendar::PeriodCalendar;
use crate::model::{ContributionId, Role, SpanKind, SpeechContribution, TopicVocabulary, PRESIDENCY_ACTION};

/// One broken invariant. Violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Sentence with `start >= end` or `end` past the text.
    RangeViolation {
        sentence: usize,
    },
    /// Sentence out of order, overlapping its predecessor, or misnumbered.
    SentenceOrder {
        sentence: usize,
    },
    /// Non-whitespace character (code-point offset) not covered by any sentence.
    Uncovered {
        offset: usize,
    },
    /// Annotation with `start >= end` or `end` past the text.
    AnnotationRange {
        annotation: usize,
    },
    /// Call-to-order span on a contribution whose speaker is not the president.
    PresidentOnlyViolation {
        annotation: usize,
    },
    /// President contribution with a topic other than the presidency label.
    PresidencyTopic {
        label: String,
    },
    UnknownTopic {
        label: String,
    },
    TopicConfidence,
    PeriodInvalid,
    SessionInvalid,
    DateOutsidePeriod,
    /// `id` does not follow `{period}-{session}-{agenda}-{seq}` for this record.
    IdMismatch,
    /// Speaker carries a resolved id and is also flagged ambiguous.
    ResolvedButAmbiguous,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RangeViolation { sentence } => write!(f, "sentence {sentence} out of range"),
            Violation::SentenceOrder { sentence } => write!(f, "sentence {sentence} out of order"),
            Violation::Uncovered { offset } => write!(f, "character {offset} not covered by a sentence"),
            Violation::AnnotationRange { annotation } => write!(f, "annotation {annotation} out of range"),
            Violation::PresidentOnlyViolation { annotation } => {
                write!(
                    f,
                    "annotation {annotation} is a call to order on a non-president contribution"
                )
            }
            Violation::PresidencyTopic { label } => write!(f, "president contribution labelled {label:?}"),
            Violation::UnknownTopic { label } => write!(f, "topic {label:?} not in vocabulary"),
            Violation::TopicConfidence => f.write_str("topic confidence outside [0, 1]"),
            Violation::PeriodInvalid => f.write_str("legislative period must be >= 1"),
            Violation::SessionInvalid => f.write_str("session number must be >= 1"),
            Violation::DateOutsidePeriod => f.write_str("date outside the legislative period"),
            Violation::IdMismatch => f.write_str("id does not match period/session/agenda"),
            Violation::ResolvedButAmbiguous => f.write_str("speaker resolved but flagged ambiguous"),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Validator {
    pub calendar: PeriodCalendar,
    pub topics: TopicVocabulary,
}

impl Validator {
    pub fn new(calendar: PeriodCalendar, topics: TopicVocabulary) -> Self {
        Self { calendar, topics }
    }

    /// Every invariant violation of `record`, in a stable order. Empty iff valid.
    ///
    /// A record with no sentences counts as not yet segmented and skips the
    /// coverage check.
    pub fn validate(&self, record: &SpeechContribution) -> Vec<Violation> {
        let mut out = Vec::new();
        let chars: Vec<char> = record.text.chars().collect();
        let len = chars.len();

        if record.legislative_period < 1 {
            out.push(Violation::PeriodInvalid);
        }
        if record.session_number < 1 {
            out.push(Violation::SessionInvalid);
        }
        match record.id.parse::<ContributionId>() {
            Ok(id)
                if id.period == record.legislative_period
                    && id.session == record.session_number
                    && id.agenda == record.agenda_number
                    && id.seq >= 1 => {}
            _ => out.push(Violation::IdMismatch),
        }
        if !self.calendar.contains(record.legislative_period, record.date) {
            out.push(Violation::DateOutsidePeriod);
        }

        let mut prev_end = 0;
        for (i, s) in record.sentences.iter().enumerate() {
            if s.start >= s.end || s.end > len {
                out.push(Violation::RangeViolation { sentence: i });
            } else if s.index != i || s.start < prev_end {
                out.push(Violation::SentenceOrder { sentence: i });
            }
            prev_end = prev_end.max(s.end);
        }
        if !record.sentences.is_empty() {
            let mut covered = vec![false; len];
            for s in &record.sentences {
                for c in covered.iter_mut().take(s.end.min(len)).skip(s.start) {
                    *c = true;
                }
            }
            if let Some(offset) = (0..len).find(|&i| !covered[i] && !chars[i].is_whitespace()) {
                out.push(Violation::Uncovered { offset });
            }
        }

        for (i, a) in record.annotations.iter().enumerate() {
            if a.start >= a.end || a.end > len {
                out.push(Violation::AnnotationRange { annotation: i });
            }
            if a.kind == SpanKind::CallToOrder && record.role != Role::President {
                out.push(Violation::PresidentOnlyViolation { annotation: i });
            }
        }

        if let Some(topic) = &record.topic {
            if !self.topics.contains(&topic.label) {
                out.push(Violation::UnknownTopic {
                    label: topic.label.clone(),
                });
            }
            if record.role == Role::President && topic.label != PRESIDENCY_ACTION {
                out.push(Violation::PresidencyTopic {
                    label: topic.label.clone(),
                });
            }
            if !(0.0..=1.0).contains(&topic.confidence) {
                out.push(Violation::TopicConfidence);
            }
        }

        if record.speaker.resolved_mp_id.is_some() && record.speaker.ambiguous {
            out.push(Violation::ResolvedButAmbiguous);
        }
        out
    }
}

/// Validates against the shipped calendar and topic vocabulary.
pub fn validate(record: &SpeechContribution) -> Vec<Violation> {
    static DEFAULT: OnceLock<Validator> = OnceLock::new();
    DEFAULT.get_or_init(Validator::default).validate(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Sentence, SpanAnnotation, SpeakerRef, TopicLabel};
    use chrono::NaiveDate;

    fn fixture() -> SpeechContribution {
        SpeechContribution {
            id: "19-183-1-1".into(),
            legislative_period: 19,
            session_number: 183,
            agenda_number: 1,
            agenda_type: "Tagesordnungspunkt".into(),
            agenda_description: String::new(),
            date: NaiveDate::from_ymd_opt(2020, 10, 2).unwrap(),
            speaker: SpeakerRef {
                raw_name: "Wolfgang Schäuble".into(),
                first_name: "Wolfgang".into(),
                surname: "Schäuble".into(),
                ..Default::default()
            },
            role: Role::President,
            topic: Some(TopicLabel::presidency()),
            source_uri: "fixture.xml".into(),
            text: "Ich rufe Sie zur Ordnung. Wir fahren fort.".into(),
            sentences: vec![
                Sentence {
                    index: 0,
                    start: 0,
                    end: 25,
                },
                Sentence {
                    index: 1,
                    start: 26,
                    end: 42,
                },
            ],
            annotations: vec![SpanAnnotation::new(SpanKind::CallToOrder, 0, 25, "", "cto")],
        }
    }

    #[test]
    fn well_formed_record_is_valid() {
        assert_eq!(validate(&fixture()), vec![]);
    }

    #[test]
    fn sentence_past_text_end() {
        let mut r = fixture();
        r.sentences = vec![Sentence {
            index: 0,
            start: 0,
            end: 50,
        }];
        assert_eq!(validate(&r), vec![Violation::RangeViolation { sentence: 0 }]);
    }

    #[test]
    fn call_to_order_on_member_record() {
        let mut r = fixture();
        r.role = Role::Member;
        r.topic = None;
        assert_eq!(validate(&r), vec![Violation::PresidentOnlyViolation { annotation: 0 }]);
    }

    #[test]
    fn uncovered_and_misordered_sentences() {
        let mut r = fixture();
        r.sentences = vec![Sentence {
            index: 0,
            start: 0,
            end: 25,
        }];
        assert_eq!(validate(&r), vec![Violation::Uncovered { offset: 26 }]);
        r.sentences = vec![
            Sentence {
                index: 0,
                start: 0,
                end: 30,
            },
            Sentence {
                index: 1,
                start: 26,
                end: 42,
            },
        ];
        assert_eq!(validate(&r), vec![Violation::SentenceOrder { sentence: 1 }]);
    }

    #[test]
    fn metadata_violations() {
        let mut r = fixture();
        r.date = NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
        r.id = "19-183-2-1".into();
        r.topic = Some(TopicLabel {
            label: "Health".into(),
            confidence: 1.5,
        });
        r.speaker.resolved_mp_id = Some("1".into());
        r.speaker.ambiguous = true;
        assert_eq!(
            validate(&r),
            vec![
                Violation::IdMismatch,
                Violation::DateOutsidePeriod,
                Violation::PresidencyTopic { label: "Health".into() },
                Violation::TopicConfidence,
                Violation::ResolvedButAmbiguous,
            ]
        );
    }

    #[test]
    fn unsegmented_record_skips_coverage() {
        let mut r = fixture();
        r.sentences.clear();
        assert!(validate(&r).is_empty());
    }
}
