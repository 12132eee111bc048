use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use plenum_core::annotate::{AnnotationConfig, AnnotatorKind, ExternalAnnotator};
use plenum_service::ServiceConfig;
use serde::Deserialize;

/// The shared `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub service: Option<toml::Value>,
    pub annotate: AnnotateSection,
    pub resolve: ResolveSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnotateSection {
    pub ner: Option<Vec<String>>,
    pub topic: Option<String>,
    pub workers: Option<usize>,
    pub external: Vec<ExternalSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalSection {
    pub id: String,
    pub kind: AnnotatorKind,
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResolveSection {
    pub mps: Option<PathBuf>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let source = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        toml::from_str(&source).with_context(|| format!("invalid config {}", path.display()))
    }

    /// The `[service]` table plus `PLENUM_*` environment overrides.
    pub fn service(&self) -> anyhow::Result<ServiceConfig> {
        let base = match &self.service {
            Some(v) => ServiceConfig::from_toml(&toml::to_string(v)?, "[service]")?,
            None => ServiceConfig::default(),
        };
        Ok(base.with_overrides(|name| std::env::var(name).ok())?)
    }

    pub fn annotation(&self) -> AnnotationConfig {
        let mut config = AnnotationConfig::default();
        for e in &self.annotate.external {
            config.registry.register(Arc::new(ExternalAnnotator::new(
                e.id.clone(),
                e.kind,
                e.program.clone(),
                e.args.clone(),
            )));
        }
        if let Some(ner) = &self.annotate.ner {
            config.ner = ner.clone();
        }
        if let Some(topic) = &self.annotate.topic {
            config.topic = Some(topic.clone());
        }
        if let Some(w) = self.annotate.workers {
            config.workers = w.max(1);
        }
        config
    }
}
