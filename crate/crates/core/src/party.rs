//! Party alias table and party-name normalization.

use std::collections::BTreeMap;

use serde::Deserialize;

use crate::fold::fold_key;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AliasTableError {
    #[error("invalid alias table JSON: {0}")]
    Json(String),
    #[error("alias {alias:?} maps to both {first} and {second}")]
    Conflict {
        alias: String,
        first: String,
        second: String,
    },
    #[error("party {0} has an empty id or display name")]
    Empty(String),
}

#[derive(Debug, Deserialize)]
struct AliasFile {
    version: String,
    parties: Vec<PartyEntry>,
}

#[derive(Debug, Deserialize)]
struct PartyEntry {
    id: String,
    display: String,
    #[serde(default)]
    aliases: Vec<String>,
}

/// Folded alias → canonical party id. The id and the display abbreviation of
/// every party are themselves aliases, so normalizing an id yields the id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyAliasTable {
    version: String,
    aliases: BTreeMap<String, String>,
    display: BTreeMap<String, String>,
}

impl PartyAliasTable {
    pub const DEFAULT_SOURCE: &'static str = include_str!("../config/party_aliases.json");

    pub fn from_json(source: &str) -> Result<Self, AliasTableError> {
        let file: AliasFile = serde_json::from_str(source).map_err(|e| AliasTableError::Json(e.to_string()))?;
        let mut table = Self {
            version: file.version,
            aliases: BTreeMap::new(),
            display: BTreeMap::new(),
        };
        for party in file.parties {
            if party.id.trim().is_empty() || party.display.trim().is_empty() {
                return Err(AliasTableError::Empty(party.id));
            }
            let names = [party.id.clone(), party.display.clone()]
                .into_iter()
                .chain(party.aliases);
            for alias in names {
                let key = fold_key(&alias);
                if key.is_empty() {
                    continue;
                }
                if let Some(existing) = table.aliases.get(&key) {
                    if existing != &party.id {
                        return Err(AliasTableError::Conflict {
                            alias,
                            first: existing.clone(),
                            second: party.id.clone(),
                        });
                    }
                }
                table.aliases.insert(key, party.id.clone());
            }
            table.display.insert(party.id, party.display);
        }
        Ok(table)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    /// Canonical id for an alias after case-folding, trimming and punctuation stripping.
    pub fn lookup(&self, raw: &str) -> Option<&str> {
        self.aliases.get(&fold_key(raw)).map(String::as_str)
    }

    pub fn display_name(&self, id: &str) -> Option<&str> {
        self.display.get(id).map(String::as_str)
    }

    pub fn canonical_ids(&self) -> impl Iterator<Item = &str> {
        self.display.keys().map(String::as_str)
    }

    /// All (folded alias, canonical id) pairs.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.aliases.iter().map(|(a, id)| (a.as_str(), id.as_str()))
    }
}

impl Default for PartyAliasTable {
    fn default() -> Self {
        Self::from_json(Self::DEFAULT_SOURCE).expect("shipped alias table is valid")
    }
}

/// Outcome of party normalization; an unresolved name keeps the raw string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartyResolution {
    Canonical(String),
    Unresolved(String),
}

impl PartyResolution {
    pub fn canonical(&self) -> Option<&str> {
        match self {
            PartyResolution::Canonical(id) => Some(id),
            PartyResolution::Unresolved(_) => None,
        }
    }
}

pub fn normalize_party(raw: &str, aliases: &PartyAliasTable) -> PartyResolution {
    match aliases.lookup(raw) {
        Some(id) => PartyResolution::Canonical(id.to_string()),
        None => PartyResolution::Unresolved(raw.to_string()),
    }
}
