//! JSON-lines reading and writing of export-schema records, the format passed
//! between pipeline stages.

use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::model::SpeechContribution;

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Record { path: String, line: usize, message: String },
}

pub fn write_records<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a SpeechContribution>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Parses records; `origin` names the source in errors. Blank lines are skipped.
pub fn read_records(r: impl Read, origin: &str) -> Result<Vec<SpeechContribution>, JsonlError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line.map_err(|source| JsonlError::Io {
            path: origin.to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| JsonlError::Record {
            path: origin.to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> JsonlError + '_ {
    move |source| JsonlError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// `*.jsonl` files of a directory in name order, or the path itself if it is a file.
pub fn list_files(path: &Path) -> Result<Vec<PathBuf>, JsonlError> {
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(path)
        .map_err(io_err(path))?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn read_file(path: &Path) -> Result<Vec<SpeechContribution>, JsonlError> {
    let f = std::fs::File::open(path).map_err(io_err(path))?;
    read_records(f, &path.display().to_string())
}

pub fn write_file(path: &Path, records: &[SpeechContribution]) -> Result<(), JsonlError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let f = std::fs::File::create(path).map_err(io_err(path))?;
    write_records(BufWriter::new(f), records).map_err(io_err(path))
}

/// Every record below `path`, file by file.
pub fn read_all(path: &Path) -> Result<Vec<(PathBuf, Vec<SpeechContribution>)>, JsonlError> {
    list_files(path)?
        .into_iter()
        .map(|p| read_file(&p).map(|r| (p, r)))
        .collect()
}

/// File name for one session's records.
pub fn session_file_name(period: u32, session: u32) -> String {
    format!("{period:02}-{session:04}.jsonl")
}
