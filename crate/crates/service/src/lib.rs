//! HTTP API over an index snapshot: search, record detail, streamed
//! subcorpus export, query-log statistics and health.

pub mod app;
pub mod config;
pub mod export;
pub mod querylog;
pub mod snippet;

pub use app::{router, serve, AppState};
pub use config::ServiceConfig;
pub use export::ExportBundle;
pub use querylog::{Denylist, QueryLogEntry, QueryLogger};
