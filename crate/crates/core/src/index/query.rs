//! Field-scoped boolean queries as sent by clients.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::IndexError;

pub const MAX_PAGE_SIZE: u32 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    #[serde(rename = "AND", alias = "and")]
    And,
    #[serde(rename = "OR", alias = "or")]
    Or,
    #[serde(rename = "NOT", alias = "not")]
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    FullText,
    Speaker,
    Party,
    LegislativePeriod,
    Topic,
    Date,
    Role,
    SessionNumber,
    AgendaNumber,
    HasCallToOrder,
    HasInterjection,
    /// Every field above.
    #[serde(alias = "ALL")]
    All,
}

impl Field {
    pub const SELECTORS: [Field; 11] = [
        Field::FullText,
        Field::Speaker,
        Field::Party,
        Field::LegislativePeriod,
        Field::Topic,
        Field::Date,
        Field::Role,
        Field::SessionNumber,
        Field::AgendaNumber,
        Field::HasCallToOrder,
        Field::HasInterjection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Field::FullText => "full_text",
            Field::Speaker => "speaker",
            Field::Party => "party",
            Field::LegislativePeriod => "legislative_period",
            Field::Topic => "topic",
            Field::Date => "date",
            Field::Role => "role",
            Field::SessionNumber => "session_number",
            Field::AgendaNumber => "agenda_number",
            Field::HasCallToOrder => "has_call_to_order",
            Field::HasInterjection => "has_interjection",
            Field::All => "all",
        }
    }

    /// Tokenized fields matched by term or phrase.
    pub fn is_text(self) -> bool {
        matches!(self, Field::FullText | Field::Speaker | Field::Party | Field::Topic)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Clause {
    pub op: Op,
    pub field: Field,
    pub value: String,
}

impl Clause {
    pub fn new(op: Op, field: Field, value: impl Into<String>) -> Self {
        Self {
            op,
            field,
            value: value.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sort {
    #[default]
    Relevance,
    DateAsc,
    DateDesc,
}

fn default_page() -> u32 {
    1
}

fn default_page_size() -> u32 {
    20
}

/// Clauses fold strictly left to right: the first clause's operator is
/// ignored, then AND intersects, OR unites and NOT subtracts from the running
/// set. No clauses matches every document.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    #[serde(default)]
    pub clauses: Vec<Clause>,
    #[serde(default)]
    pub sort: Sort,
    #[serde(default = "default_page")]
    pub page: u32,
    #[serde(default = "default_page_size")]
    pub page_size: u32,
}

impl Default for Query {
    fn default() -> Self {
        Self {
            clauses: Vec::new(),
            sort: Sort::default(),
            page: default_page(),
            page_size: default_page_size(),
        }
    }
}

impl Query {
    pub fn new(clauses: Vec<Clause>) -> Self {
        Self {
            clauses,
            ..Self::default()
        }
    }

    pub fn sorted(mut self, sort: Sort) -> Self {
        self.sort = sort;
        self
    }

    pub fn paged(mut self, page: u32, page_size: u32) -> Self {
        self.page = page;
        self.page_size = page_size;
        self
    }

    /// Parses the JSON form used on the wire.
    pub fn from_json(s: &str) -> Result<Self, IndexError> {
        let q: Query = serde_json::from_str(s).map_err(|e| IndexError::InvalidQuery(e.to_string()))?;
        q.check()?;
        Ok(q)
    }

    pub fn check(&self) -> Result<(), IndexError> {
        if self.page < 1 {
            return Err(IndexError::InvalidQuery("page must be at least 1".into()));
        }
        if !(1..=MAX_PAGE_SIZE).contains(&self.page_size) {
            return Err(IndexError::InvalidQuery(format!(
                "page_size must be in 1..={MAX_PAGE_SIZE}"
            )));
        }
        for (i, c) in self.clauses.iter().enumerate() {
            if c.value.trim().is_empty() {
                return Err(IndexError::InvalidQuery(format!("clause {} has an empty value", i + 1)));
            }
            match c.field {
                Field::Date => {
                    parse_date_range(&c.value)?;
                }
                Field::LegislativePeriod | Field::SessionNumber | Field::AgendaNumber => {
                    parse_number(&c.value).ok_or_else(|| invalid(c, "expected a non-negative integer"))?;
                }
                Field::HasCallToOrder | Field::HasInterjection => {
                    parse_flag(&c.value).ok_or_else(|| invalid(c, "expected true or false"))?;
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn invalid(c: &Clause, msg: &str) -> IndexError {
    IndexError::InvalidQuery(format!("{} value {:?}: {msg}", c.field, c.value))
}

pub(crate) fn parse_number(v: &str) -> Option<u32> {
    v.trim().parse().ok()
}

pub(crate) fn parse_flag(v: &str) -> Option<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" => Some(true),
        "false" => Some(false),
        _ => None,
    }
}

/// `YYYY-MM-DD` or the closed range `YYYY-MM-DD..YYYY-MM-DD`.
pub fn parse_date_range(v: &str) -> Result<(NaiveDate, NaiveDate), IndexError> {
    let bad = || IndexError::InvalidQuery(format!("malformed date or date range {v:?}"));
    let parse = |s: &str| NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|_| bad());
    match v.split_once("..") {
        Some((a, b)) => {
            let (a, b) = (parse(a)?, parse(b)?);
            if a > b {
                return Err(bad());
            }
            Ok((a, b))
        }
        None => {
            let d = parse(v)?;
            Ok((d, d))
        }
    }
}

/// Quoted values are phrases.
pub(crate) fn phrase_body(v: &str) -> Option<&str> {
    let v = v.trim();
    (v.len() >= 2 && v.starts_with('"') && v.ends_with('"')).then(|| &v[1..v.len() - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wire_form() {
        let q = Query::from_json(r#"{"clauses":[{"op":"AND","field":"legislative_period","value":"19"},{"op":"NOT","field":"party","value":"CDU"}],"sort":"date_desc"}"#).unwrap();
        assert_eq!(q.clauses[1], Clause::new(Op::Not, Field::Party, "CDU"));
        assert_eq!((q.sort, q.page, q.page_size), (Sort::DateDesc, 1, 20));
        assert_eq!(serde_json::to_value(Field::All).unwrap(), "all");
        assert!(Query::from_json(r#"{"clauses":[{"op":"AND","field":"ALL","value":"x"}]}"#).is_ok());
    }

    #[test]
    fn rejects_bad_queries() {
        for bad in [
            r#"{"clauses":[{"op":"AND","field":"colour","value":"x"}]}"#,
            r#"{"clauses":[{"op":"XOR","field":"party","value":"x"}]}"#,
            r#"{"clauses":[{"op":"AND","field":"party","value":"  "}]}"#,
            r#"{"clauses":[{"op":"AND","field":"date","value":"2020-13-01"}]}"#,
            r#"{"clauses":[{"op":"AND","field":"date","value":"2021-01-01..2020-01-01"}]}"#,
            r#"{"clauses":[{"op":"AND","field":"legislative_period","value":"neunzehn"}]}"#,
            r#"{"clauses":[{"op":"AND","field":"has_call_to_order","value":"maybe"}]}"#,
            r#"{"page":0}"#,
            r#"{"page_size":201}"#,
            r#"{"page_size":0}"#,
            r#"{"clauses":[],"extra":1}"#,
        ] {
            assert!(
                matches!(Query::from_json(bad), Err(IndexError::InvalidQuery(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn date_ranges() {
        let d = |s: &str| s.parse::<NaiveDate>().unwrap();
        assert_eq!(
            parse_date_range("2020-01-02").unwrap(),
            (d("2020-01-02"), d("2020-01-02"))
        );
        assert_eq!(
            parse_date_range("2020-01-02..2020-03-01").unwrap(),
            (d("2020-01-02"), d("2020-03-01"))
        );
    }
}
