mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use plenum_core::annotate::annotate_records;
use plenum_core::index::{IndexSnapshot, Query};
use plenum_core::ingest::{FetchCursor, Schema};
use plenum_core::pipeline::{self, PipelineError};
use plenum_core::resolve::ResolutionTables;
use plenum_core::Validator;
use plenum_service::export;
use plenum_service::querylog::{self, Denylist};

use crate::config::Config;

#[derive(Parser)]
#[command(
    name = "plenum",
    version,
    about = "Parliamentary debate corpus pipeline and search service"
)]
struct Cli {
    /// Shared TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse raw XML transcripts into one record file per session.
    Ingest {
        #[arg(long)]
        schema: Schema,
        /// XML files or directories of them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Recompute sentence boundaries.
    Segment {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Add calls to order, entities, party mentions and topics.
    Annotate {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// NER annotator ids; replaces the configured list.
        #[arg(long = "ner")]
        ner: Vec<String>,
        #[arg(long)]
        topic: Option<String>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Link speakers to MP ids and normalize parties.
    Resolve {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// MP table (CSV); defaults to the configured one.
        #[arg(long)]
        mps: Option<PathBuf>,
    },
    /// Validate records and write an index snapshot.
    Index {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        /// Snapshot file or directory; overrides the configuration.
        snapshot: Option<PathBuf>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long = "log-dir")]
        log_dir: Option<PathBuf>,
    },
    /// Write the export bundle of a query.
    Export {
        snapshot: PathBuf,
        /// Query JSON, or @FILE to read it from a file.
        #[arg(short, long)]
        query: String,
        #[arg(long)]
        cap: Option<usize>,
        /// Keep the first CAP records instead of failing when more match.
        #[arg(long)]
        truncate: bool,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Corpus and query-log statistics.
    Stats {
        #[command(subcommand)]
        which: Stats,
    },
    /// Download new sessions from a remote endpoint.
    Fetch {
        /// Cursor file; created on first use.
        #[arg(long)]
        cursor: PathBuf,
        /// Endpoint URL; required when the cursor file does not exist yet.
        #[arg(long)]
        endpoint: Option<String>,
        #[arg(long = "page-size", default_value_t = 20)]
        page_size: usize,
        /// Directory receiving one XML file per session.
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Subcommand)]
enum Stats {
    /// Most frequent query terms.
    TopTerms {
        /// Query log directory; defaults to the configured one.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(short, default_value_t = 10)]
        n: usize,
        /// Extra denylist file; defaults to the configured one.
        #[arg(long)]
        denylist: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Topic counts per legislative period.
    Topics { snapshot: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn require(path: &Path) -> anyhow::Result<()> {
    if !path.exists() {
        bail!("input not found: {}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest { schema, inputs, output } => {
            let mut files = Vec::new();
            for input in &inputs {
                require(input)?;
                files.extend(pipeline::xml_files(input)?);
            }
            if files.is_empty() {
                return Err(PipelineError::NoInput(inputs[0].display().to_string()).into());
            }
            let docs = pipeline::read_docs(schema, &files)?;
            let sessions = pipeline::ingest_docs(&docs)?;
            let written = pipeline::write_sessions(&output, &sessions)?;
            let skipped = sessions.len() - written.len();
            println!(
                "{} session file(s) written to {}, {skipped} already present",
                written.len(),
                output.display()
            );
        }
        Command::Segment { input, output } => {
            require(&input)?;
            let segmenter = plenum_core::segment::Segmenter::default();
            let n = pipeline::map_stage(&input, &output, |mut records| {
                pipeline::segment_records(&mut records, &segmenter);
                Ok(records)
            })?;
            println!("{n} record(s) segmented");
        }
        Command::Annotate {
            input,
            output,
            ner,
            topic,
            workers,
        } => {
            require(&input)?;
            let mut annotation = config.annotation();
            if !ner.is_empty() {
                annotation.ner = ner;
            }
            if topic.is_some() {
                annotation.topic = topic;
            }
            if let Some(w) = workers {
                annotation.workers = w.max(1);
            }
            annotation.check()?;
            let mut failures = Vec::new();
            let n = pipeline::map_stage(&input, &output, |records| {
                let (records, failed) = annotate_records(records, &annotation)?;
                failures.extend(failed);
                Ok(records)
            })?;
            for f in &failures {
                eprintln!("warning: {f}");
            }
            println!("{n} record(s) annotated");
            if !failures.is_empty() {
                bail!("{} annotator failure(s)", failures.len());
            }
        }
        Command::Resolve { input, output, mps } => {
            require(&input)?;
            let Some(mps) = mps.or(config.resolve.mps.clone()) else {
                bail!("no MP table given; pass --mps or set resolve.mps in the configuration");
            };
            require(&mps)?;
            let file = std::fs::File::open(&mps).with_context(|| format!("cannot open {}", mps.display()))?;
            let tables = ResolutionTables::from_csv(file, Default::default(), Default::default())
                .with_context(|| format!("invalid MP table {}", mps.display()))?;
            let n = pipeline::map_stage(&input, &output, |mut records| {
                pipeline::resolve_records(&mut records, &tables)?;
                Ok(records)
            })?;
            println!("{n} record(s) resolved");
        }
        Command::Index { input, output } => {
            require(&input)?;
            let index = pipeline::index_dir(&input, &Validator::default())?;
            let header = index.save(&output)?;
            println!(
                "{} document(s) indexed into {} (sha256 {})",
                header.doc_count,
                output.display(),
                header.body_sha256
            );
        }
        Command::Serve {
            snapshot,
            port,
            bind,
            log_dir,
        } => {
            let mut service = config.service()?;
            if let Some(s) = snapshot {
                service.index_path = s;
            }
            if let Some(p) = port {
                service.port = p;
            }
            if let Some(b) = bind {
                service.bind = b;
            }
            if let Some(l) = log_dir {
                service.log_path = l;
            }
            require(&service.index_path)?;
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(plenum_service::serve(service))?;
        }
        Command::Export {
            snapshot,
            query,
            cap,
            truncate,
            output,
        } => {
            require(&snapshot)?;
            let json = match query.strip_prefix('@') {
                Some(path) => {
                    std::fs::read_to_string(path).with_context(|| format!("cannot read query file {path}"))?
                }
                None => query,
            };
            let query = Query::from_json(&json)?;
            let index = IndexSnapshot::load(&snapshot)?;
            let max = config.service()?.export_cap;
            let plan = export::plan(&index, &query, cap.unwrap_or(max), max, truncate)?;
            let generated_at = export::timestamp(chrono::Utc::now());
            match output {
                Some(path) => {
                    let file =
                        std::fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
                    let mut w = std::io::BufWriter::new(file);
                    export::write_bundle(&mut w, &index, &query, &plan, &generated_at)?;
                    w.flush()?;
                    eprintln!(
                        "{} of {} record(s) exported to {}",
                        plan.ids.len(),
                        plan.total,
                        path.display()
                    );
                }
                None => {
                    let mut w = std::io::BufWriter::new(std::io::stdout().lock());
                    export::write_bundle(&mut w, &index, &query, &plan, &generated_at)?;
                    w.flush()?;
                }
            }
        }
        Command::Stats { which } => stats(which, &config)?,
        Command::Fetch {
            cursor,
            endpoint,
            page_size,
            output,
        } => fetch(&cursor, endpoint, page_size, &output)?,
    }
    Ok(())
}

fn stats(which: Stats, config: &Config) -> anyhow::Result<()> {
    match which {
        Stats::TopTerms { log, n, denylist, json } => {
            let service = config.service()?;
            let log = log.unwrap_or(service.log_path);
            require(&log)?;
            let denylist = match denylist.or(service.denylist_path) {
                Some(p) => Denylist::from_file(&p).with_context(|| format!("cannot read denylist {}", p.display()))?,
                None => Denylist::default(),
            };
            let entries = querylog::read_entries(&log)?;
            let top = querylog::top_terms(&entries, n, &denylist);
            if json {
                println!("{}", serde_json::to_string_pretty(&top)?);
            } else {
                let width = top.iter().map(|t| t.term.chars().count()).max().unwrap_or(4).max(4);
                println!("{:<5} {:<width$} {:>9}", "rank", "term", "frequency");
                for (i, t) in top.iter().enumerate() {
                    println!("{:<5} {:<width$} {:>9}", i + 1, t.term, t.frequency);
                }
            }
        }
        Stats::Topics { snapshot } => {
            require(&snapshot)?;
            let index = IndexSnapshot::load(&snapshot)?;
            println!("{}", serde_json::to_string_pretty(&index.aggregate_topics())?);
        }
    }
    Ok(())
}

fn fetch(cursor_path: &Path, endpoint: Option<String>, page_size: usize, output: &Path) -> anyhow::Result<()> {
    let cursor = if cursor_path.exists() {
        let raw =
            std::fs::read_to_string(cursor_path).with_context(|| format!("cannot read {}", cursor_path.display()))?;
        let mut c: FetchCursor =
            serde_json::from_str(&raw).with_context(|| format!("invalid cursor {}", cursor_path.display()))?;
        if let Some(e) = endpoint {
            c.endpoint_url = e;
        }
        c.page_size = page_size;
        c
    } else {
        let Some(e) = endpoint else {
            bail!(
                "cursor {} does not exist; pass --endpoint to start one",
                cursor_path.display()
            );
        };
        FetchCursor::new(e, page_size)
    };
    let runtime = tokio::runtime::Runtime::new()?;
    let (docs, next) = runtime.block_on(plenum_core::ingest::fetch_updates(&cursor))?;
    std::fs::create_dir_all(output).with_context(|| format!("cannot create {}", output.display()))?;
    for doc in &docs {
        let key = doc.source_uri.rsplit_once('#').map_or("session", |(_, k)| k);
        let path = output.join(format!("{key}.xml"));
        std::fs::write(&path, &doc.xml_bytes).with_context(|| format!("cannot write {}", path.display()))?;
    }
    // The cursor only advances once the documents are on disk.
    let tmp = cursor_path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec_pretty(&next)?)?;
    std::fs::rename(&tmp, cursor_path)?;
    println!(
        "{} session(s) fetched; cursor at {}",
        docs.len(),
        next.last_session_key.as_deref().unwrap_or("start")
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_line_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn schema_flag_parses() {
        let cli = Cli::try_parse_from(["plenum", "ingest", "--schema", "bundestag", "in", "-o", "out"]).unwrap();
        assert!(matches!(
            cli.command,
            Command::Ingest {
                schema: Schema::Bundestag,
                ..
            }
        ));
        assert!(Cli::try_parse_from(["plenum", "ingest", "--schema", "tei", "in", "-o", "out"]).is_err());
    }
}
