//! Annotators running as external processes over a JSON-lines protocol.
//!
//! Input, one object per record: `{"id": ..., "role": ..., "text": ...}`.
//! Output, one object per input line, in order:
//! `{"id": ..., "spans": [{"start": 0, "end": 5, "label": "PER"}]}` for NER, or
//! `{"id": ..., "label": "Health", "confidence": 0.8}` for topics.
//! Offsets are code points.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use super::{AnnotateError, Annotator, AnnotatorKind, AnnotatorOutput};
use crate::model::{SpanAnnotation, SpanKind, SpeechContribution, TopicLabel, TopicVocabulary};

#[derive(Serialize)]
struct Request<'a> {
    id: &'a str,
    role: &'a str,
    text: &'a str,
}

#[derive(Deserialize)]
struct Response {
    id: String,
    #[serde(default)]
    spans: Vec<ResponseSpan>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    confidence: Option<f64>,
}

#[derive(Deserialize)]
struct ResponseSpan {
    start: usize,
    end: usize,
    label: String,
}

#[derive(Debug, Clone)]
pub struct ExternalAnnotator {
    id: String,
    kind: AnnotatorKind,
    program: String,
    args: Vec<String>,
    vocabulary: TopicVocabulary,
}

impl ExternalAnnotator {
    pub fn new(id: impl Into<String>, kind: AnnotatorKind, program: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            id: id.into(),
            kind,
            program: program.into(),
            args,
            vocabulary: TopicVocabulary::default(),
        }
    }

    fn failure(&self, record: &str, message: impl Into<String>) -> AnnotateError {
        AnnotateError::AnnotatorFailure {
            annotator: self.id.clone(),
            record: record.to_string(),
            message: message.into(),
        }
    }

    /// Runs one process over `records`; the whole batch fails together.
    fn run(&self, records: &[SpeechContribution]) -> Result<Vec<AnnotatorOutput>, AnnotateError> {
        let first = records.first().map_or("", |r| r.id.as_str());
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| self.failure(first, format!("cannot start {}: {e}", self.program)))?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let payload: Vec<u8> = records
            .iter()
            .flat_map(|r| {
                let mut line = serde_json::to_vec(&Request {
                    id: &r.id,
                    role: r.role.as_str(),
                    text: &r.text,
                })
                .expect("request serializes");
                line.push(b'\n');
                line
            })
            .collect();
        let writer = std::thread::spawn(move || stdin.write_all(&payload));
        let stdout = child.stdout.take().expect("stdout is piped");
        let lines: Vec<String> = BufReader::new(stdout)
            .lines()
            .collect::<Result<_, _>>()
            .map_err(|e| self.failure(first, e.to_string()))?;
        let status = child.wait().map_err(|e| self.failure(first, e.to_string()))?;
        let _ = writer.join();
        if !status.success() {
            let mut err = String::new();
            if let Some(mut s) = child.stderr.take() {
                let _ = std::io::Read::read_to_string(&mut s, &mut err);
            }
            return Err(self.failure(first, format!("exited with {status}: {}", err.trim())));
        }
        let lines: Vec<&String> = lines.iter().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != records.len() {
            return Err(self.failure(
                first,
                format!("expected {} output lines, got {}", records.len(), lines.len()),
            ));
        }
        records
            .iter()
            .zip(lines)
            .map(|(record, line)| self.decode(record, line))
            .collect()
    }

    fn decode(&self, record: &SpeechContribution, line: &str) -> Result<AnnotatorOutput, AnnotateError> {
        let resp: Response =
            serde_json::from_str(line).map_err(|e| self.failure(&record.id, format!("bad output line: {e}")))?;
        if resp.id != record.id {
            return Err(self.failure(&record.id, format!("output for {:?} out of order", resp.id)));
        }
        match self.kind {
            AnnotatorKind::Ner => {
                let len = record.text_len();
                let mut spans = Vec::with_capacity(resp.spans.len());
                for s in resp.spans {
                    if s.start >= s.end || s.end > len || s.label.is_empty() {
                        return Err(
                            self.failure(&record.id, format!("invalid span {}..{} {:?}", s.start, s.end, s.label))
                        );
                    }
                    spans.push(SpanAnnotation::new(
                        SpanKind::NerEntity,
                        s.start,
                        s.end,
                        s.label,
                        self.id.clone(),
                    ));
                }
                Ok(AnnotatorOutput::Spans(spans))
            }
            AnnotatorKind::Topic => {
                let label = resp.label.ok_or_else(|| self.failure(&record.id, "missing label"))?;
                let confidence = resp.confidence.unwrap_or(1.0);
                if !self.vocabulary.contains(&label) || !(0.0..=1.0).contains(&confidence) {
                    return Err(self.failure(&record.id, format!("invalid topic {label:?} ({confidence})")));
                }
                Ok(AnnotatorOutput::Topic(TopicLabel { label, confidence }))
            }
        }
    }
}

impl Annotator for ExternalAnnotator {
    fn id(&self) -> &str {
        &self.id
    }

    fn kind(&self) -> AnnotatorKind {
        self.kind
    }

    fn annotate(&self, record: &SpeechContribution) -> Result<AnnotatorOutput, AnnotateError> {
        Ok(self.run(std::slice::from_ref(record))?.remove(0))
    }

    /// Splits `records` into at most `workers` chunks, one process each.
    fn annotate_batch(
        &self,
        records: &[SpeechContribution],
        workers: usize,
    ) -> Vec<Result<AnnotatorOutput, AnnotateError>> {
        if records.is_empty() {
            return Vec::new();
        }
        let chunk = records.len().div_ceil(workers.max(1));
        std::thread::scope(|scope| {
            let handles: Vec<_> = records
                .chunks(chunk)
                .map(|c| scope.spawn(move || (c.len(), self.run(c))))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| match h.join().expect("annotator worker panicked") {
                    (_, Ok(outputs)) => outputs.into_iter().map(Ok).collect::<Vec<_>>(),
                    (n, Err(e)) => vec![Err(e); n],
                })
                .collect()
        })
    }
}
