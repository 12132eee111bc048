//! Append-only query log with daily files, the query-term denylist and the
//! top-terms statistic computed over the log.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, NaiveDate, Utc};
use plenum_core::index::Query;
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;
use tracing::warn;

/// Terms excluded from statistics regardless of configuration.
pub const BUILTIN_DENYLIST: [&str; 4] = ["system", "sleep", "exec", "bash"];

pub const MAX_TOP_TERMS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLogEntry {
    pub timestamp: DateTime<Utc>,
    pub raw_terms: Vec<String>,
    pub clause_count: usize,
    pub excluded: bool,
}

/// Case-insensitive substring denylist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denylist {
    terms: Vec<String>,
}

impl Default for Denylist {
    fn default() -> Self {
        Self {
            terms: BUILTIN_DENYLIST.iter().map(|t| t.to_string()).collect(),
        }
    }
}

impl Denylist {
    /// The built-in terms plus `extra`; blank entries are ignored.
    pub fn with_additions<I, S>(extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut list = Self::default();
        for t in extra {
            let t = t.as_ref().trim().to_lowercase();
            if !t.is_empty() && !list.terms.contains(&t) {
                list.terms.push(t);
            }
        }
        list
    }

    /// One term per line; `#` starts a comment line.
    pub fn parse(source: &str) -> Self {
        Self::with_additions(source.lines().filter(|l| !l.trim_start().starts_with('#')))
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn hits(&self, value: &str) -> bool {
        let v = value.to_lowercase();
        self.terms.iter().any(|t| v.contains(t.as_str()))
    }
}

/// Lowercased clause value with enclosing quotes removed and spaces collapsed.
pub fn normalize_term(value: &str) -> String {
    let v = value.trim();
    let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
    v.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl QueryLogEntry {
    pub fn new(query: &Query, timestamp: DateTime<Utc>, denylist: &Denylist) -> Self {
        let excluded = query.clauses.iter().any(|c| denylist.hits(&c.value));
        Self {
            timestamp,
            raw_terms: query
                .clauses
                .iter()
                .map(|c| normalize_term(&c.value))
                .filter(|t| !t.is_empty())
                .collect(),
            clause_count: query.clauses.len(),
            excluded,
        }
    }
}

pub fn log_file_name(day: NaiveDate) -> String {
    format!("queries-{}.jsonl", day.format("%Y-%m-%d"))
}

/// Appends entries to the file of their day.
pub fn append_entries(dir: &Path, entries: &[QueryLogEntry]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut by_day: Vec<(NaiveDate, Vec<u8>)> = Vec::new();
    for e in entries {
        let day = e.timestamp.date_naive();
        let mut line = serde_json::to_vec(e).expect("log entries serialize");
        line.push(b'\n');
        match by_day.iter_mut().find(|(d, _)| *d == day) {
            Some((_, buf)) => buf.extend(line),
            None => by_day.push((day, line)),
        }
    }
    for (day, buf) in by_day {
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(log_file_name(day)))?;
        f.write_all(&buf)?;
        f.flush()?;
    }
    Ok(())
}

/// Log files in `dir`, oldest first.
pub fn log_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("queries-") && n.ends_with(".jsonl"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Every readable entry under `dir`. Lines that do not parse, such as a
/// partially written last line, are skipped with a warning.
pub fn read_entries(dir: &Path) -> std::io::Result<Vec<QueryLogEntry>> {
    let mut out = Vec::new();
    for path in log_files(dir)? {
        let file = std::fs::File::open(&path)?;
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line) {
                Ok(e) => out.push(e),
                Err(err) => warn!(file = %path.display(), line = n + 1, %err, "skipping log line"),
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermCount {
    pub term: String,
    pub frequency: u64,
}

/// The `n` most frequent terms (at most [`MAX_TOP_TERMS`]) over entries that
/// are neither flagged nor caught by `denylist`; ties in lexicographic order.
pub fn top_terms(entries: &[QueryLogEntry], n: usize, denylist: &Denylist) -> Vec<TermCount> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for e in entries {
        if e.excluded || e.raw_terms.iter().any(|t| denylist.hits(t)) {
            continue;
        }
        for t in &e.raw_terms {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<TermCount> = counts
        .into_iter()
        .map(|(term, frequency)| TermCount {
            term: term.to_string(),
            frequency,
        })
        .collect();
    ranked.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.term.cmp(&b.term)));
    ranked.truncate(n.min(MAX_TOP_TERMS));
    ranked
}

/// Producer side of the log; cheap to clone.
#[derive(Debug, Clone)]
pub struct QueryLogger {
    tx: mpsc::UnboundedSender<QueryLogEntry>,
}

impl QueryLogger {
    /// Starts the single writer task for `dir`. The task ends, after
    /// draining, once every logger clone is dropped.
    pub fn spawn(dir: PathBuf) -> (Self, tokio::task::JoinHandle<()>) {
        let (tx, mut rx) = mpsc::unbounded_channel::<QueryLogEntry>();
        let task = tokio::spawn(async move {
            let mut batch = Vec::new();
            while rx.recv_many(&mut batch, 256).await > 0 {
                let entries = std::mem::take(&mut batch);
                let dir = dir.clone();
                let written = tokio::task::spawn_blocking(move || append_entries(&dir, &entries)).await;
                match written {
                    Ok(Ok(())) => {}
                    Ok(Err(err)) => warn!(%err, "query log write failed"),
                    Err(err) => warn!(%err, "query log writer panicked"),
                }
            }
        });
        (Self { tx }, task)
    }

    /// A logger whose entries are dropped.
    pub fn disabled() -> Self {
        let (tx, _) = mpsc::unbounded_channel();
        Self { tx }
    }

    pub fn log(&self, entry: QueryLogEntry) {
        // A closed channel means the service is shutting down.
        let _ = self.tx.send(entry);
    }
}
