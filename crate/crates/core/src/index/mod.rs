//! Inverted index over speech contributions with left-to-right boolean
//! evaluation and BM25 ranking.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::fold::german_fold;
use crate::model::{Role, SpeechContribution};

pub mod query;
pub mod snapshot;

pub use query::{parse_date_range, Clause, Field, Op, Query, Sort, MAX_PAGE_SIZE};

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;

/// Position gap between separately indexed values of one field, so phrases
/// never match across them.
const VALUE_GAP: u32 = 100;

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("duplicate contribution id {0}")]
    DuplicateId(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot is not in index format: {0}")]
    Format(String),
    #[error("snapshot format version {found} is newer than supported version {supported}")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("snapshot checksum mismatch")]
    Checksum,
}

/// Lowercased, umlaut-folded Unicode words.
pub fn analyze(text: &str) -> Vec<String> {
    text.unicode_words().map(german_fold).collect()
}

/// Tokens with their code-point ranges in `text`.
pub fn analyze_with_offsets(text: &str) -> Vec<(String, usize, usize)> {
    let mut out = Vec::new();
    let mut chars_before = 0;
    let mut last_byte = 0;
    for (byte, word) in text.unicode_word_indices() {
        chars_before += text[last_byte..byte].chars().count();
        let len = word.chars().count();
        out.push((german_fold(word), chars_before, chars_before + len));
        chars_before += len;
        last_byte = byte + word.len();
    }
    out
}

fn day_number(d: NaiveDate) -> i32 {
    d.num_days_from_ce()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub positions: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextFieldIndex {
    pub postings: BTreeMap<String, Vec<Posting>>,
    /// Token count per document.
    pub doc_len: Vec<u32>,
}

impl TextFieldIndex {
    fn add(&mut self, doc: u32, values: &[&str]) {
        let mut by_term: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut pos = 0u32;
        let mut len = 0u32;
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                pos += VALUE_GAP;
            }
            for tok in analyze(v) {
                by_term.entry(tok).or_default().push(pos);
                pos += 1;
                len += 1;
            }
        }
        for (term, positions) in by_term {
            self.postings.entry(term).or_default().push(Posting { doc, positions });
        }
        self.doc_len.push(len);
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map_or(&[], Vec::as_slice)
    }

    fn docs_with_all(&self, terms: &[String]) -> Vec<u32> {
        let mut iter = terms.iter();
        let Some(first) = iter.next() else {
            return Vec::new();
        };
        let mut acc: Vec<u32> = self.postings(first).iter().map(|p| p.doc).collect();
        for t in iter {
            let docs: Vec<u32> = self.postings(t).iter().map(|p| p.doc).collect();
            acc = intersect(&acc, &docs);
        }
        acc
    }

    fn positions(&self, term: &str, doc: u32) -> &[u32] {
        let list = self.postings(term);
        list.binary_search_by_key(&doc, |p| p.doc)
            .map_or(&[], |i| list[i].positions.as_slice())
    }

    fn phrase(&self, terms: &[String]) -> Vec<u32> {
        self.docs_with_all(terms)
            .into_iter()
            .filter(|&d| {
                self.positions(&terms[0], d).iter().any(|&p| {
                    terms[1..]
                        .iter()
                        .enumerate()
                        .all(|(i, t)| self.positions(t, d).binary_search(&(p + 1 + i as u32)).is_ok())
                })
            })
            .collect()
    }

    /// Documents matching `value`: a quoted value is a phrase, otherwise every token must occur.
    fn eval(&self, value: &str) -> Vec<u32> {
        match query::phrase_body(value) {
            Some(body) => {
                let terms = analyze(body);
                if terms.is_empty() {
                    Vec::new()
                } else {
                    self.phrase(&terms)
                }
            }
            None => self.docs_with_all(&analyze(value)),
        }
    }
}

/// Immutable searchable state. Documents are numbered in id order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexSnapshot {
    docs: Vec<SpeechContribution>,
    full_text: TextFieldIndex,
    speaker: TextFieldIndex,
    party: TextFieldIndex,
    topic: TextFieldIndex,
    /// Keyword field → exact value → sorted documents.
    keywords: BTreeMap<Field, BTreeMap<String, Vec<u32>>>,
    dates: BTreeMap<i32, Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub id: String,
    pub score: f64,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultPage {
    pub total: usize,
    pub page: u32,
    pub page_size: u32,
    pub hits: Vec<Hit>,
}

fn keyword_values(r: &SpeechContribution) -> [(Field, String); 6] {
    [
        (Field::LegislativePeriod, r.legislative_period.to_string()),
        (Field::Role, r.role.as_str().to_string()),
        (Field::SessionNumber, r.session_number.to_string()),
        (Field::AgendaNumber, r.agenda_number.to_string()),
        (Field::HasCallToOrder, r.has_call_to_order().to_string()),
        (Field::HasInterjection, r.has_interjection().to_string()),
    ]
}

/// Builds a snapshot; rebuilding from the same records in any order yields an equal snapshot.
pub fn build_index(records: impl IntoIterator<Item = SpeechContribution>) -> Result<IndexSnapshot, IndexError> {
    let mut docs: Vec<SpeechContribution> = records.into_iter().collect();
    docs.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = docs.windows(2).find(|w| w[0].id == w[1].id) {
        return Err(IndexError::DuplicateId(w[0].id.clone()));
    }
    let mut snap = IndexSnapshot {
        docs: Vec::new(),
        full_text: TextFieldIndex::default(),
        speaker: TextFieldIndex::default(),
        party: TextFieldIndex::default(),
        topic: TextFieldIndex::default(),
        keywords: BTreeMap::new(),
        dates: BTreeMap::new(),
    };
    for (i, r) in docs.iter().enumerate() {
        let doc = i as u32;
        snap.full_text.add(doc, &[&r.text]);
        snap.speaker.add(doc, &[&r.speaker.raw_name]);
        let mut party = vec![r.speaker.party.raw.as_str()];
        if let Some(c) = &r.speaker.party.canonical {
            party.push(c);
        }
        snap.party.add(doc, &party);
        snap.topic
            .add(doc, &[r.topic.as_ref().map_or("", |t| t.label.as_str())]);
        for (field, value) in keyword_values(r) {
            snap.keywords
                .entry(field)
                .or_default()
                .entry(value)
                .or_default()
                .push(doc);
        }
        snap.dates.entry(day_number(r.date)).or_default().push(doc);
    }
    snap.docs = docs;
    Ok(snap)
}

fn intersect(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let (mut i, mut j, mut out) = (0, 0, Vec::with_capacity(a.len().max(b.len())));
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            out.push(a[i]);
            i += 1;
            j += 1;
        }
    }
    out
}

fn difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut j = 0;
    a.iter()
        .copied()
        .filter(|&x| {
            while j < b.len() && b[j] < x {
                j += 1;
            }
            j == b.len() || b[j] != x
        })
        .collect()
}

impl IndexSnapshot {
    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn docs(&self) -> &[SpeechContribution] {
        &self.docs
    }

    pub fn get(&self, id: &str) -> Option<&SpeechContribution> {
        self.docs
            .binary_search_by(|d| d.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.docs[i])
    }

    /// Ids holding `term` in `field`, for a text field.
    pub fn term_docs(&self, field: Field, term: &str) -> Vec<&str> {
        self.text_field(field)
            .map(|f| {
                f.postings(term)
                    .iter()
                    .map(|p| self.docs[p.doc as usize].id.as_str())
                    .collect()
            })
            .unwrap_or_default()
    }

    fn text_field(&self, field: Field) -> Option<&TextFieldIndex> {
        match field {
            Field::FullText => Some(&self.full_text),
            Field::Speaker => Some(&self.speaker),
            Field::Party => Some(&self.party),
            Field::Topic => Some(&self.topic),
            _ => None,
        }
    }

    fn keyword(&self, field: Field, value: &str) -> Vec<u32> {
        self.keywords
            .get(&field)
            .and_then(|m| m.get(value))
            .cloned()
            .unwrap_or_default()
    }

    fn eval_field(&self, field: Field, value: &str) -> Vec<u32> {
        if let Some(f) = self.text_field(field) {
            return f.eval(value);
        }
        match field {
            Field::LegislativePeriod | Field::SessionNumber | Field::AgendaNumber => query::parse_number(value)
                .map(|n| self.keyword(field, &n.to_string()))
                .unwrap_or_default(),
            Field::HasCallToOrder | Field::HasInterjection => query::parse_flag(value)
                .map(|b| self.keyword(field, &b.to_string()))
                .unwrap_or_default(),
            Field::Role => {
                let v = value.trim().to_lowercase();
                if Role::ALL.iter().any(|r| r.as_str() == v) {
                    self.keyword(field, &v)
                } else {
                    Vec::new()
                }
            }
            Field::Date => match parse_date_range(value) {
                Ok((a, b)) => {
                    let mut docs: Vec<u32> = self
                        .dates
                        .range(day_number(a)..=day_number(b))
                        .flat_map(|(_, d)| d.iter().copied())
                        .collect();
                    docs.sort_unstable();
                    docs
                }
                Err(_) => Vec::new(),
            },
            Field::All => Field::SELECTORS
                .iter()
                .fold(Vec::new(), |acc, &f| union(&acc, &self.eval_field(f, value))),
            _ => unreachable!("text fields handled above"),
        }
    }

    /// Matching documents in index order, without scoring.
    pub fn match_set(&self, q: &Query) -> Result<Vec<u32>, IndexError> {
        q.check()?;
        let mut clauses = q.clauses.iter();
        let Some(first) = clauses.next() else {
            return Ok((0..self.docs.len() as u32).collect());
        };
        let mut acc = self.eval_field(first.field, &first.value);
        for c in clauses {
            let s = self.eval_field(c.field, &c.value);
            acc = match c.op {
                Op::And => intersect(&acc, &s),
                Op::Or => union(&acc, &s),
                Op::Not => difference(&acc, &s),
            };
        }
        Ok(acc)
    }

    /// Terms scored against full text: every non-NOT clause on full_text or ALL.
    /// The first clause always counts, since its operator is ignored.
    pub fn scoring_terms(q: &Query) -> Vec<String> {
        q.clauses
            .iter()
            .enumerate()
            .filter(|(i, c)| (*i == 0 || c.op != Op::Not) && matches!(c.field, Field::FullText | Field::All))
            .flat_map(|(_, c)| {
                let mut seen = HashSet::new();
                analyze(query::phrase_body(&c.value).unwrap_or(&c.value))
                    .into_iter()
                    .filter(move |t| seen.insert(t.clone()))
            })
            .collect()
    }

    /// BM25 over full text, summed over scoring terms, for each document in `docs`.
    pub fn bm25(&self, docs: &[u32], terms: &[String]) -> Vec<f64> {
        let mut scores = vec![0.0; docs.len()];
        let n = self.docs.len() as f64;
        if docs.is_empty() || n == 0.0 {
            return scores;
        }
        let total: u64 = self.full_text.doc_len.iter().map(|&l| l as u64).sum();
        let avgdl = (total as f64 / n).max(f64::MIN_POSITIVE);
        for term in terms {
            let postings = self.full_text.postings(term);
            if postings.is_empty() {
                continue;
            }
            let df = postings.len() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            for p in postings {
                if let Ok(i) = docs.binary_search(&p.doc) {
                    let tf = p.positions.len() as f64;
                    let dl = self.full_text.doc_len[p.doc as usize] as f64;
                    scores[i] += idf * tf * (BM25_K1 + 1.0) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / avgdl));
                }
            }
        }
        scores
    }

    /// All hits in result order, ignoring pagination.
    pub fn ranked(&self, q: &Query) -> Result<Vec<Hit>, IndexError> {
        let docs = self.match_set(q)?;
        let scores = self.bm25(&docs, &Self::scoring_terms(q));
        let mut order: Vec<usize> = (0..docs.len()).collect();
        let date = |i: usize| self.docs[docs[i] as usize].date;
        // Document numbers follow id order, so comparing them breaks ties by id.
        match q.sort {
            Sort::Relevance => order.sort_by(|&a, &b| {
                scores[b]
                    .total_cmp(&scores[a])
                    .then_with(|| date(b).cmp(&date(a)))
                    .then_with(|| docs[a].cmp(&docs[b]))
            }),
            Sort::DateAsc => order.sort_by(|&a, &b| date(a).cmp(&date(b)).then_with(|| docs[a].cmp(&docs[b]))),
            Sort::DateDesc => order.sort_by(|&a, &b| date(b).cmp(&date(a)).then_with(|| docs[a].cmp(&docs[b]))),
        }
        Ok(order
            .into_iter()
            .map(|i| {
                let d = &self.docs[docs[i] as usize];
                Hit {
                    id: d.id.clone(),
                    score: scores[i],
                    date: d.date,
                }
            })
            .collect())
    }

    /// One page of results; pages past the end are empty.
    pub fn search(&self, q: &Query) -> Result<ResultPage, IndexError> {
        let hits = self.ranked(q)?;
        let total = hits.len();
        let skip = (q.page as usize - 1).saturating_mul(q.page_size as usize);
        Ok(ResultPage {
            total,
            page: q.page,
            page_size: q.page_size,
            hits: hits.into_iter().skip(skip).take(q.page_size as usize).collect(),
        })
    }

    /// Topic counts per legislative period over labeled documents.
    pub fn aggregate_topics(&self) -> BTreeMap<u32, BTreeMap<String, u64>> {
        let mut out: BTreeMap<u32, BTreeMap<String, u64>> = BTreeMap::new();
        for d in &self.docs {
            if let Some(t) = &d.topic {
                *out.entry(d.legislative_period)
                    .or_default()
                    .entry(t.label.clone())
                    .or_default() += 1;
            }
        }
        out
    }

    /// Checks postings and stores agree; used after loading from disk.
    pub fn check(&self) -> Result<(), IndexError> {
        let n = self.docs.len();
        if self.docs.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(IndexError::Format("documents not in strict id order".into()));
        }
        let sorted_in_range = |docs: &mut dyn Iterator<Item = u32>| {
            let v: Vec<u32> = docs.collect();
            v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&d| (d as usize) < n)
        };
        for f in [&self.full_text, &self.speaker, &self.party, &self.topic] {
            if f.doc_len.len() != n
                || !f
                    .postings
                    .values()
                    .all(|p| sorted_in_range(&mut p.iter().map(|p| p.doc)))
            {
                return Err(IndexError::Format(
                    "text postings inconsistent with document store".into(),
                ));
            }
        }
        let keyword_lists = self.keywords.values().flat_map(|m| m.values());
        for list in keyword_lists.chain(self.dates.values()) {
            if !sorted_in_range(&mut list.iter().copied()) {
                return Err(IndexError::Format(
                    "keyword postings inconsistent with document store".into(),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{PartyRef, SpeakerRef, TopicLabel};

    fn rec(id: &str, period: u32, date: &str, party: &str, text: &str) -> SpeechContribution {
        SpeechContribution {
            id: id.into(),
            legislative_period: period,
            session_number: 1,
            agenda_number: 1,
            agenda_type: String::new(),
            agenda_description: String::new(),
            date: date.parse().unwrap(),
            speaker: SpeakerRef {
                raw_name: "Angela Merkel".into(),
                first_name: "Angela".into(),
                surname: "Merkel".into(),
                party: PartyRef {
                    raw: party.into(),
                    canonical: None,
                },
                ..SpeakerRef::default()
            },
            role: Role::Member,
            topic: None,
            source_uri: String::new(),
            text: text.into(),
            sentences: vec![],
            annotations: vec![],
        }
    }

    fn fixture() -> IndexSnapshot {
        build_index(vec![
            rec(
                "19-1-1-1",
                19,
                "2018-01-10",
                "CDU",
                "Der Klimawandel ist real. Migration auch.",
            ),
            rec(
                "19-1-1-2",
                19,
                "2018-01-10",
                "SPD",
                "Migration und Klimawandel, Klimawandel!",
            ),
            rec("20-1-1-1", 20, "2022-01-10", "CDU", "Über Migration reden wir."),
            rec("1-1-1-1", 1, "1950-01-10", "FDP", "Die Sitzung ist eröffnet."),
            rec("3-1-1-1", 3, "1958-01-10", "SPD", "Wir reden über Migration."),
        ])
        .unwrap()
    }

    fn ids(s: &IndexSnapshot, q: Query) -> Vec<String> {
        let mut v: Vec<String> = s.ranked(&q).unwrap().into_iter().map(|h| h.id).collect();
        v.sort();
        v
    }

    #[test]
    fn doc_count_and_duplicates() {
        assert_eq!(fixture().doc_count(), 5);
        let r = rec("1-1-1-1", 1, "1950-01-10", "", "x");
        assert!(matches!(
            build_index(vec![r.clone(), r]),
            Err(IndexError::DuplicateId(_))
        ));
    }

    #[test]
    fn postings_for_term() {
        let s = fixture();
        assert_eq!(
            s.term_docs(Field::FullText, "klimawandel"),
            vec!["19-1-1-1", "19-1-1-2"]
        );
    }

    #[test]
    fn period_clause() {
        let s = fixture();
        let q = Query::new(vec![Clause::new(Op::And, Field::LegislativePeriod, "19")]);
        assert_eq!(s.search(&q).unwrap().total, 2);
    }

    #[test]
    fn not_is_difference_from_running_set() {
        let s = fixture();
        let q = Query::new(vec![
            Clause::new(Op::And, Field::FullText, "migration"),
            Clause::new(Op::Not, Field::Party, "CDU"),
        ]);
        assert_eq!(ids(&s, q), vec!["19-1-1-2", "3-1-1-1"]);
        let first_not = Query::new(vec![Clause::new(Op::Not, Field::Party, "CDU")]);
        assert_eq!(ids(&s, first_not), vec!["19-1-1-1", "20-1-1-1"]);
    }

    #[test]
    fn empty_query_matches_everything() {
        assert_eq!(fixture().search(&Query::default()).unwrap().total, 5);
    }

    #[test]
    fn phrases_need_adjacency() {
        let s = fixture();
        let q = |v: &str| Query::new(vec![Clause::new(Op::And, Field::FullText, v)]);
        assert_eq!(ids(&s, q("\"reden wir\"")), vec!["20-1-1-1"]);
        assert_eq!(ids(&s, q("reden wir")), vec!["20-1-1-1", "3-1-1-1"]);
        assert_eq!(ids(&s, q("\"angela merkel\"")), Vec::<String>::new());
        let speaker = Query::new(vec![Clause::new(Op::And, Field::Speaker, "\"Angela Merkel\"")]);
        assert_eq!(s.search(&speaker).unwrap().total, 5);
    }

    #[test]
    fn folding_applies_to_queries() {
        let s = fixture();
        let q = Query::new(vec![Clause::new(Op::And, Field::FullText, "UEBER")]);
        assert_eq!(ids(&s, q), vec!["20-1-1-1", "3-1-1-1"]);
    }

    #[test]
    fn all_field_and_dates() {
        let s = fixture();
        let q = Query::new(vec![Clause::new(Op::And, Field::All, "19")]);
        assert_eq!(s.search(&q).unwrap().total, 2);
        let q = Query::new(vec![Clause::new(Op::And, Field::Date, "1950-01-01..1960-12-31")]);
        assert_eq!(ids(&s, q), vec!["1-1-1-1", "3-1-1-1"]);
    }

    #[test]
    fn relevance_prefers_higher_tf() {
        let s = fixture();
        let q = Query::new(vec![Clause::new(Op::And, Field::FullText, "klimawandel")]);
        let hits = s.ranked(&q).unwrap();
        assert_eq!(hits[0].id, "19-1-1-2");
        assert!(hits[0].score > hits[1].score && hits[1].score > 0.0);
    }

    #[test]
    fn metadata_only_matches_score_zero_and_tie_break_by_date() {
        let s = fixture();
        let q = Query::new(vec![Clause::new(Op::And, Field::Party, "SPD")]);
        let hits = s.ranked(&q).unwrap();
        assert!(hits.iter().all(|h| h.score == 0.0));
        assert_eq!(hits[0].id, "19-1-1-2");
    }

    #[test]
    fn pagination() {
        let s = fixture();
        let q = Query::default().sorted(Sort::DateAsc).paged(2, 2);
        let page = s.search(&q).unwrap();
        assert_eq!(page.total, 5);
        let ids: Vec<_> = page.hits.iter().map(|h| h.id.as_str()).collect();
        assert_eq!(ids, vec!["19-1-1-1", "19-1-1-2"]);
        assert!(s.search(&Query::default().paged(9, 2)).unwrap().hits.is_empty());
    }

    #[test]
    fn topic_aggregation() {
        let mut docs = Vec::new();
        for i in 1..=3 {
            let mut r = rec(&format!("19-1-1-{i}"), 19, "2018-01-10", "", "x");
            r.topic = Some(TopicLabel::presidency());
            docs.push(r);
        }
        docs.push(rec("19-1-1-4", 19, "2018-01-10", "", "x"));
        let agg = build_index(docs).unwrap().aggregate_topics();
        assert_eq!(agg[&19]["PresidencyAction"], 3);
        assert_eq!(agg[&19].values().sum::<u64>(), 3);
        assert!(build_index(vec![]).unwrap().aggregate_topics().is_empty());
    }

    #[test]
    fn set_operations() {
        assert_eq!(union(&[1, 3, 5], &[2, 3, 6]), vec![1, 2, 3, 5, 6]);
        assert_eq!(intersect(&[1, 3, 5], &[2, 3, 5]), vec![3, 5]);
        assert_eq!(difference(&[1, 3, 5], &[3, 4]), vec![1, 5]);
    }

    #[test]
    fn offsets_are_code_points() {
        let toks = analyze_with_offsets("Über die Ökosteuer");
        assert_eq!(toks[0], ("ueber".to_string(), 0, 4));
        assert_eq!(toks[2], ("oekosteuer".to_string(), 9, 18));
    }
}
