//! Stage orchestration: ingest → segment → annotate → resolve → index.
//!
//! Every stage reads and writes per-session JSON-lines files, so each can be
//! re-run on its own output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::annotate::{annotate_records, AnnotateError, AnnotationConfig};
use crate::index::{build_index, IndexError, IndexSnapshot};
use crate::ingest::{self, dedup_sessions, IngestError, ParsedSession, RawSessionDoc, Schema};
use crate::jsonl::{self, JsonlError};
use crate::model::SpeechContribution;
use crate::resolve::{resolve_record, ResolutionTables, ResolveError};
use crate::segment::Segmenter;
use crate::validate::{Validator, Violation};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("no input files found at {0}")]
    NoInput(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Jsonl(#[from] JsonlError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("record {id} is invalid: {}", violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid { id: String, violations: Vec<Violation> },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// `*.xml` files below a directory in name order, or the file itself.
pub fn xml_files(path: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io(path))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("xml")))
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_docs(schema: Schema, paths: &[PathBuf]) -> Result<Vec<RawSessionDoc>, PipelineError> {
    paths
        .iter()
        .map(|p| {
            let bytes = std::fs::read(p).map_err(io(p))?;
            Ok(RawSessionDoc::new(schema, bytes, p.display().to_string()))
        })
        .collect()
}

/// Parses documents in parallel and drops sessions supplied twice.
pub fn ingest_docs(docs: &[RawSessionDoc]) -> Result<Vec<ParsedSession>, PipelineError> {
    let parsed: Vec<Result<Option<ParsedSession>, IngestError>> = docs
        .par_iter()
        .map(|d| ingest::parse(d).map(|r| ParsedSession::from_records(d.schema, r)))
        .collect();
    let mut sessions = Vec::new();
    for p in parsed {
        sessions.extend(p?);
    }
    Ok(dedup_sessions(sessions))
}

/// One file per session; returns the written paths.
///
/// Follows the dedup policy across runs: a germaparl session never replaces
/// an existing session file, a bundestag session always does.
pub fn write_sessions(dir: &Path, sessions: &[ParsedSession]) -> Result<Vec<PathBuf>, PipelineError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::new();
    for s in sessions {
        let path = dir.join(jsonl::session_file_name(s.period, s.session));
        if s.schema == Schema::Germaparl && path.exists() {
            tracing::info!(path = %path.display(), "session already present; germaparl copy skipped");
            continue;
        }
        jsonl::write_file(&path, &s.records)?;
        written.push(path);
    }
    Ok(written)
}

/// Recomputes sentence boundaries from the text.
pub fn segment_records(records: &mut [SpeechContribution], segmenter: &Segmenter) {
    records
        .par_iter_mut()
        .for_each(|r| r.sentences = segmenter.segment(&r.text));
}

pub fn resolve_records(records: &mut [SpeechContribution], tables: &ResolutionTables) -> Result<(), ResolveError> {
    records.par_iter_mut().try_for_each(|r| resolve_record(r, tables))
}

/// Applies `stage` to every record file of `input`, writing same-named files to `output`.
pub fn map_stage<F>(input: &Path, output: &Path, mut stage: F) -> Result<usize, PipelineError>
where
    F: FnMut(Vec<SpeechContribution>) -> Result<Vec<SpeechContribution>, PipelineError>,
{
    let files = jsonl::list_files(input)?;
    if files.is_empty() {
        return Err(PipelineError::NoInput(input.display().to_string()));
    }
    let mut count = 0;
    for file in files {
        let records = stage(jsonl::read_file(&file)?)?;
        count += records.len();
        let name = file.file_name().expect("listed files have names");
        jsonl::write_file(&output.join(name), &records)?;
    }
    Ok(count)
}

pub fn check_records(records: &[SpeechContribution], validator: &Validator) -> Result<(), PipelineError> {
    match records
        .par_iter()
        .map(|r| (r, validator.validate(r)))
        .find_first(|(_, v)| !v.is_empty())
    {
        Some((r, violations)) => Err(PipelineError::Invalid {
            id: r.id.clone(),
            violations,
        }),
        None => Ok(()),
    }
}

/// Validates and indexes every record below `input`.
pub fn index_dir(input: &Path, validator: &Validator) -> Result<IndexSnapshot, PipelineError> {
    let files = jsonl::list_files(input)?;
    if files.is_empty() {
        return Err(PipelineError::NoInput(input.display().to_string()));
    }
    let mut records = Vec::new();
    for f in files {
        records.extend(jsonl::read_file(&f)?);
    }
    check_records(&records, validator)?;
    Ok(build_index(records)?)
}

/// Settings for running every stage in memory.
#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub segmenter: Segmenter,
    pub annotation: AnnotationConfig,
    pub tables: Option<ResolutionTables>,
    pub validator: Validator,
}

/// Runs all stages over raw documents and returns the indexed records in
/// session order. Annotator failures abort the run.
pub fn run(docs: &[RawSessionDoc], config: &PipelineConfig) -> Result<Vec<SpeechContribution>, PipelineError> {
    let mut records: Vec<SpeechContribution> = ingest_docs(docs)?.into_iter().flat_map(|s| s.records).collect();
    segment_records(&mut records, &config.segmenter);
    let (mut records, failures) = annotate_records(records, &config.annotation)?;
    if let Some(e) = failures.into_iter().next() {
        return Err(e.into());
    }
    if let Some(tables) = &config.tables {
        resolve_records(&mut records, tables)?;
    }
    check_records(&records, &config.validator)?;
    Ok(records)
}
