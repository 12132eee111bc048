//! Call-to-order detection, entity tagging, party mentions and topic labels.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{Role, SpanAnnotation, SpanKind, SpeechContribution, TopicLabel};
use crate::party::PartyAliasTable;
use crate::segment::Segmenter;

pub mod cto;
pub mod external;
pub mod gazetteer;
pub mod topic;

pub use cto::{detect_calls_to_order, CtoRule, CtoRuleSet, RuleSetError};
pub use external::ExternalAnnotator;
pub use gazetteer::GazetteerNer;
pub use topic::KeywordTopicClassifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotatorKind {
    Ner,
    Topic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnnotatorOutput {
    Spans(Vec<SpanAnnotation>),
    Topic(TopicLabel),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnnotateError {
    #[error("unknown annotator {0:?}")]
    UnknownAnnotator(String),
    #[error("annotator {annotator} failed on {record}: {message}")]
    AnnotatorFailure {
        annotator: String,
        record: String,
        message: String,
    },
}

/// A named NER or topic model. Implementations must be deterministic for a
/// fixed id and input.
pub trait Annotator: Send + Sync {
    fn id(&self) -> &str;

    fn kind(&self) -> AnnotatorKind;

    fn annotate(&self, record: &SpeechContribution) -> Result<AnnotatorOutput, AnnotateError>;

    /// Annotates many records, using at most `workers` concurrent invocations.
    fn annotate_batch(
        &self,
        records: &[SpeechContribution],
        workers: usize,
    ) -> Vec<Result<AnnotatorOutput, AnnotateError>> {
        let _ = workers;
        records.par_iter().map(|r| self.annotate(r)).collect()
    }
}

#[derive(Clone, Default)]
pub struct AnnotatorRegistry {
    annotators: BTreeMap<String, Arc<dyn Annotator>>,
}

impl AnnotatorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the shipped deterministic stubs.
    pub fn with_stubs() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(GazetteerNer::german()));
        r.register(Arc::new(GazetteerNer::german_legal()));
        r.register(Arc::new(KeywordTopicClassifier::stub()));
        r
    }

    /// Adds `annotator`, replacing any previous one with the same id.
    pub fn register(&mut self, annotator: Arc<dyn Annotator>) {
        self.annotators.insert(annotator.id().to_string(), annotator);
    }

    pub fn get(&self, id: &str) -> Result<&Arc<dyn Annotator>, AnnotateError> {
        self.annotators
            .get(id)
            .ok_or_else(|| AnnotateError::UnknownAnnotator(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.annotators.keys().map(String::as_str)
    }

    pub fn ids_of(&self, kind: AnnotatorKind) -> impl Iterator<Item = &str> {
        self.annotators
            .values()
            .filter(move |a| a.kind() == kind)
            .map(|a| a.id())
    }
}

impl std::fmt::Debug for AnnotatorRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.annotators.keys()).finish()
    }
}

/// Runs a registered annotator. Topic annotators never run on president
/// records: those always get PresidencyAction with confidence 1.
pub fn run_annotator(
    record: &SpeechContribution,
    registry: &AnnotatorRegistry,
    id: &str,
) -> Result<AnnotatorOutput, AnnotateError> {
    let annotator = registry.get(id)?;
    if annotator.kind() == AnnotatorKind::Topic && record.role == Role::President {
        return Ok(AnnotatorOutput::Topic(TopicLabel::presidency()));
    }
    annotator.annotate(record)
}

/// Party mentions derived from ORG entity spans whose surface form is a known alias.
pub fn match_party_mentions(spans: &[SpanAnnotation], aliases: &PartyAliasTable, text: &str) -> Vec<SpanAnnotation> {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<SpanAnnotation> = spans
        .iter()
        .filter(|s| s.kind == SpanKind::NerEntity && s.label == "ORG" && s.start < s.end && s.end <= chars.len())
        .filter_map(|s| {
            let surface: String = chars[s.start..s.end].iter().collect();
            aliases
                .lookup(&surface)
                .map(|id| SpanAnnotation::new(SpanKind::PartyMention, s.start, s.end, id, aliases.version()))
        })
        .collect();
    out.sort_by(|a, b| (a.start, a.end, &a.label).cmp(&(b.start, b.end, &b.label)));
    out.dedup();
    out
}

/// Annotation stage configuration.
#[derive(Debug, Clone)]
pub struct AnnotationConfig {
    pub segmenter: Segmenter,
    pub cto_rules: CtoRuleSet,
    pub aliases: PartyAliasTable,
    pub registry: AnnotatorRegistry,
    pub ner: Vec<String>,
    pub topic: Option<String>,
    pub workers: usize,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self {
            segmenter: Segmenter::default(),
            cto_rules: CtoRuleSet::default(),
            aliases: PartyAliasTable::default(),
            registry: AnnotatorRegistry::with_stubs(),
            ner: vec!["ner-german".into(), "ner-german-legal".into()],
            topic: Some("topic-stub".into()),
            workers: 4,
        }
    }
}

impl AnnotationConfig {
    /// Fails early when a configured annotator id is not registered.
    pub fn check(&self) -> Result<(), AnnotateError> {
        for id in self.ner.iter().chain(&self.topic) {
            self.registry.get(id)?;
        }
        Ok(())
    }
}

/// Segments records lacking sentences, then replaces every derived layer
/// (calls to order, entities, party mentions, topic). Interjection spans from
/// ingestion are kept, so the stage can be re-run. A failing annotator leaves
/// its layer absent on the affected record and is reported.
pub fn annotate_records(
    mut records: Vec<SpeechContribution>,
    config: &AnnotationConfig,
) -> Result<(Vec<SpeechContribution>, Vec<AnnotateError>), AnnotateError> {
    config.check()?;
    records.par_iter_mut().for_each(|r| {
        if r.sentences.is_empty() {
            r.sentences = config.segmenter.segment(&r.text);
        }
        r.annotations.retain(|a| a.kind == SpanKind::Interjection);
        r.topic = None;
        let cto = detect_calls_to_order(r, &config.cto_rules);
        r.annotations.extend(cto);
    });

    let mut failures = Vec::new();
    for id in &config.ner {
        let annotator = config.registry.get(id)?;
        let outputs = annotator.annotate_batch(&records, config.workers);
        for (record, output) in records.iter_mut().zip(outputs) {
            match output {
                Ok(AnnotatorOutput::Spans(spans)) => record.annotations.extend(spans),
                Ok(AnnotatorOutput::Topic(_)) => failures.push(AnnotateError::AnnotatorFailure {
                    annotator: id.clone(),
                    record: record.id.clone(),
                    message: "expected entity spans, got a topic".into(),
                }),
                Err(e) => failures.push(e),
            }
        }
    }

    if let Some(id) = &config.topic {
        let annotator = config.registry.get(id)?;
        let (presidents, others): (Vec<usize>, Vec<usize>) =
            (0..records.len()).partition(|&i| records[i].role == Role::President);
        for i in presidents {
            records[i].topic = Some(TopicLabel::presidency());
        }
        let batch: Vec<SpeechContribution> = others.iter().map(|&i| records[i].clone()).collect();
        let outputs = annotator.annotate_batch(&batch, config.workers);
        for (i, output) in others.into_iter().zip(outputs) {
            match output {
                Ok(AnnotatorOutput::Topic(label)) => records[i].topic = Some(label),
                Ok(AnnotatorOutput::Spans(_)) => failures.push(AnnotateError::AnnotatorFailure {
                    annotator: id.clone(),
                    record: records[i].id.clone(),
                    message: "expected a topic label, got spans".into(),
                }),
                Err(e) => failures.push(e),
            }
        }
    }

    records.par_iter_mut().for_each(|r| {
        let mentions = match_party_mentions(&r.annotations, &config.aliases, &r.text);
        r.annotations.extend(mentions);
        sort_annotations(&mut r.annotations);
    });
    Ok((records, failures))
}

/// Canonical annotation order: start, end, kind, annotator, label.
pub fn sort_annotations(spans: &mut Vec<SpanAnnotation>) {
    spans.sort_by(|a, b| {
        (a.start, a.end, a.kind, &a.annotator, &a.label).cmp(&(b.start, b.end, b.kind, &b.annotator, &b.label))
    });
    spans.dedup();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{SpeakerRef, TopicVocabulary};
    use chrono::NaiveDate;

    fn record(role: Role, text: &str) -> SpeechContribution {
        SpeechContribution {
            id: "19-1-1-1".into(),
            legislative_period: 19,
            session_number: 1,
            agenda_number: 1,
            agenda_type: "Tagesordnungspunkt".into(),
            agenda_description: String::new(),
            date: NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            speaker: SpeakerRef::default(),
            role,
            topic: None,
            source_uri: String::new(),
            text: text.into(),
            sentences: vec![],
            annotations: vec![],
        }
    }

    #[test]
    fn president_topic_is_always_presidency_action() {
        let reg = AnnotatorRegistry::with_stubs();
        let out = run_annotator(
            &record(Role::President, "Der Klimawandel ist real."),
            &reg,
            "topic-stub",
        )
        .unwrap();
        assert_eq!(out, AnnotatorOutput::Topic(TopicLabel::presidency()));
        let out = run_annotator(&record(Role::Member, "Der Klimawandel ist real."), &reg, "topic-stub").unwrap();
        assert!(matches!(out, AnnotatorOutput::Topic(t) if t.label == "Environment"));
    }

    #[test]
    fn ner_spans_carry_annotator_id() {
        let reg = AnnotatorRegistry::with_stubs();
        let out = run_annotator(
            &record(Role::Member, "Wolfgang Schäuble eröffnet die Sitzung."),
            &reg,
            "ner-german",
        )
        .unwrap();
        let AnnotatorOutput::Spans(spans) = out else { panic!() };
        assert_eq!(spans.len(), 1);
        assert_eq!((spans[0].start, spans[0].end, spans[0].label.as_str()), (0, 17, "PER"));
        assert_eq!(spans[0].annotator, "ner-german");
    }

    #[test]
    fn unknown_annotator() {
        let reg = AnnotatorRegistry::with_stubs();
        assert_eq!(
            run_annotator(&record(Role::Member, "x"), &reg, "ner-x"),
            Err(AnnotateError::UnknownAnnotator("ner-x".into()))
        );
    }

    #[test]
    fn party_mentions_from_org_spans() {
        let aliases = PartyAliasTable::default();
        let text = "Die FDP, die Freie Demokratische Partei und Merkel.";
        let spans = vec![
            SpanAnnotation::new(SpanKind::NerEntity, 13, 39, "ORG", "n"),
            SpanAnnotation::new(SpanKind::NerEntity, 4, 7, "ORG", "n"),
            SpanAnnotation::new(SpanKind::NerEntity, 44, 50, "PER", "n"),
        ];
        let got = match_party_mentions(&spans, &aliases, text);
        let got: Vec<_> = got.iter().map(|s| (s.kind, s.start, s.end, s.label.as_str())).collect();
        assert_eq!(
            got,
            vec![
                (SpanKind::PartyMention, 4, 7, "FDP"),
                (SpanKind::PartyMention, 13, 39, "FDP")
            ]
        );
    }

    #[test]
    fn non_alias_org_yields_nothing() {
        let aliases = PartyAliasTable::default();
        let spans = vec![SpanAnnotation::new(SpanKind::NerEntity, 0, 9, "ORG", "n")];
        assert!(match_party_mentions(&spans, &aliases, "Bundesrat tagt").is_empty());
    }

    #[test]
    fn annotate_records_is_idempotent_and_valid() {
        let mut president = record(
            Role::President,
            "Herr Baumann, ich rufe Sie für den Zwischenruf zur Ordnung.",
        );
        president.id = "19-1-1-2".into();
        let member = record(
            Role::Member,
            "Die SPD und die FDP streiten über den Klimaschutz. (Beifall bei der AfD)",
        );
        let cfg = AnnotationConfig::default();
        let (once, failures) = annotate_records(vec![member, president], &cfg).unwrap();
        assert!(failures.is_empty());
        let (twice, _) = annotate_records(once.clone(), &cfg).unwrap();
        assert_eq!(once, twice);
        assert_eq!(once[1].topic, Some(TopicLabel::presidency()));
        assert!(once[1].has_call_to_order());
        assert!(!once[0].has_call_to_order());
        let parties: Vec<_> = once[0]
            .annotations
            .iter()
            .filter(|a| a.kind == SpanKind::PartyMention)
            .map(|a| a.label.as_str())
            .collect();
        assert_eq!(parties, vec!["SPD", "FDP", "AfD"]);
        let vocab = TopicVocabulary::default();
        assert!(vocab.contains(&once[0].topic.as_ref().unwrap().label));
        for r in &once {
            assert_eq!(crate::validate::validate(r), vec![]);
        }
    }

    #[test]
    fn misconfigured_annotator_id_fails_early() {
        let cfg = AnnotationConfig {
            ner: vec!["ner-x".into()],
            ..AnnotationConfig::default()
        };
        assert!(matches!(
            annotate_records(vec![], &cfg),
            Err(AnnotateError::UnknownAnnotator(_))
        ));
    }
}
