use std::path::{Path, PathBuf};

use serde::Deserialize;

pub const DEFAULT_EXPORT_CAP: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("environment variable {name}={value:?}: {message}")]
    Env {
        name: String,
        value: String,
        message: String,
    },
}

/// Service settings from a TOML file, overridable through `PLENUM_*`
/// environment variables.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub bind: String,
    pub port: u16,
    /// Snapshot file or the directory holding it.
    pub index_path: PathBuf,
    /// Directory of daily query log files.
    pub log_path: PathBuf,
    /// Extra denylist terms, one per line.
    pub denylist_path: Option<PathBuf>,
    pub export_cap: usize,
    /// Length of search result snippets in characters.
    pub snippet_chars: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            index_path: PathBuf::from("snapshot"),
            log_path: PathBuf::from("querylog"),
            denylist_path: None,
            export_cap: DEFAULT_EXPORT_CAP,
            snippet_chars: 200,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml(source: &str, origin: &str) -> Result<Self, ConfigError> {
        toml::from_str(source).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let source = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&source, &path.display().to_string())
    }

    /// Applies overrides from `var`, which maps variable names to values.
    pub fn with_overrides(mut self, var: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        fn parse<T: std::str::FromStr>(name: &str, value: String) -> Result<T, ConfigError>
        where
            T::Err: std::fmt::Display,
        {
            value.trim().parse().map_err(|e: T::Err| ConfigError::Env {
                name: name.to_string(),
                message: e.to_string(),
                value,
            })
        }
        if let Some(v) = var("PLENUM_PORT") {
            self.port = parse("PLENUM_PORT", v)?;
        }
        if let Some(v) = var("PLENUM_INDEX_PATH") {
            self.index_path = v.into();
        }
        if let Some(v) = var("PLENUM_LOG_PATH") {
            self.log_path = v.into();
        }
        if let Some(v) = var("PLENUM_DENYLIST_PATH") {
            self.denylist_path = Some(v.into());
        }
        if let Some(v) = var("PLENUM_EXPORT_CAP") {
            self.export_cap = parse("PLENUM_EXPORT_CAP", v)?;
        }
        Ok(self)
    }

    /// File settings (or defaults) plus the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let base = match path {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        base.with_overrides(|name| std::env::var(name).ok())
    }
}
