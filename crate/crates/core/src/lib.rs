//! Ingestion, annotation, speaker resolution and boolean search over
//! German parliamentary debate transcripts.

pub mod annotate;
pub mod calendar;
pub mod fold;
pub mod index;
pub mod ingest;
pub mod jsonl;
pub mod model;
pub mod party;
pub mod pipeline;
pub mod resolve;
pub mod segment;
pub mod validate;
pub mod xml;

pub use index::{build_index, Clause, Field, IndexError, IndexSnapshot, Op, Query, ResultPage, Sort};
pub use model::{SpanAnnotation, SpanKind, SpeakerRef, SpeechContribution, TopicLabel};
pub use validate::{validate, Validator, Violation};
