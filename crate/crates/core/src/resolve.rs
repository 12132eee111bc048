//! Speaker disambiguation against MP master data.
//!
//! Rules are applied in order and the first decisive one wins:
//! a unique surname, then a unique (surname, first name) pair, then a unique
//! tenure containing the contribution date. Anything else stays unresolved.

use std::collections::HashMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::Deserialize;

use crate::calendar::PeriodCalendar;
use crate::fold::fold_key;
use crate::model::{SpeakerRef, SpeechContribution};
use crate::party::{normalize_party, PartyAliasTable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ResolveError {
    #[error("resolution tables are not loaded")]
    TablesNotLoaded,
    #[error("MP table line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("MP {mp_id}: {message}")]
    InvalidTenure { mp_id: String, message: String },
    #[error("variant map line {line}: {message}")]
    VariantMap { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tenure {
    pub period: u32,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl Tenure {
    pub fn contains(&self, date: NaiveDate) -> bool {
        self.start <= date && date <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartySpell {
    pub party_id: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpRecord {
    pub mp_id: String,
    pub surname: String,
    pub first_name: String,
    /// Sorted and non-overlapping.
    pub tenures: Vec<Tenure>,
    pub party_history: Vec<PartySpell>,
}

impl MpRecord {
    pub fn serves_on(&self, date: NaiveDate) -> bool {
        self.tenures.iter().any(|t| t.contains(date))
    }

    pub fn party_on(&self, date: NaiveDate) -> Option<&str> {
        self.party_history
            .iter()
            .find(|p| p.start <= date && date <= p.end)
            .map(|p| p.party_id.as_str())
    }
}

#[derive(Debug, Deserialize)]
struct MpRow {
    mp_id: String,
    surname: String,
    first_name: String,
    period: u32,
    #[serde(default)]
    start_date: Option<NaiveDate>,
    #[serde(default)]
    end_date: Option<NaiveDate>,
    #[serde(default)]
    party: String,
}

/// `variant<TAB>canonical` lines; both sides are compared after folding.
pub fn parse_variant_map(source: &str) -> Result<HashMap<String, String>, ResolveError> {
    let mut map = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let Some((variant, canonical)) = line.split_once('\t') else {
            return Err(ResolveError::VariantMap {
                line: i + 1,
                message: "expected variant<TAB>canonical".into(),
            });
        };
        let (variant, canonical) = (fold_key(variant), fold_key(canonical));
        if variant.is_empty() || canonical.is_empty() {
            return Err(ResolveError::VariantMap {
                line: i + 1,
                message: "empty name".into(),
            });
        }
        map.insert(variant, canonical);
    }
    Ok(map)
}

/// Immutable lookup structures for [`resolve_speaker`].
#[derive(Debug, Clone, Default)]
pub struct ResolutionTables {
    mps: Vec<MpRecord>,
    by_surname: HashMap<String, Vec<usize>>,
    by_name: HashMap<(String, String), Vec<usize>>,
    pub aliases: PartyAliasTable,
    pub calendar: PeriodCalendar,
    surname_variants: HashMap<String, String>,
    first_name_variants: HashMap<String, String>,
}

impl ResolutionTables {
    pub const SURNAME_VARIANTS: &'static str = include_str!("../config/surname_variants.tsv");
    pub const FIRST_NAME_VARIANTS: &'static str = include_str!("../config/first_name_variants.tsv");

    pub fn new(mps: Vec<MpRecord>, aliases: PartyAliasTable, calendar: PeriodCalendar) -> Self {
        let mut t = Self {
            mps: Vec::new(),
            by_surname: HashMap::new(),
            by_name: HashMap::new(),
            aliases,
            calendar,
            surname_variants: parse_variant_map(Self::SURNAME_VARIANTS).expect("shipped variant map is valid"),
            first_name_variants: parse_variant_map(Self::FIRST_NAME_VARIANTS).expect("shipped variant map is valid"),
        };
        for mp in mps {
            t.insert(mp);
        }
        t
    }

    pub fn with_variants(mut self, surnames: HashMap<String, String>, first_names: HashMap<String, String>) -> Self {
        self.surname_variants = surnames;
        self.first_name_variants = first_names;
        self.reindex();
        self
    }

    fn insert(&mut self, mp: MpRecord) {
        let i = self.mps.len();
        let (s, f) = (self.surname_key(&mp.surname), self.first_name_key(&mp.first_name));
        self.by_surname.entry(s.clone()).or_default().push(i);
        self.by_name.entry((s, f)).or_default().push(i);
        self.mps.push(mp);
    }

    fn reindex(&mut self) {
        let mps = std::mem::take(&mut self.mps);
        self.by_surname.clear();
        self.by_name.clear();
        for mp in mps {
            self.insert(mp);
        }
    }

    /// Reads MP master data from CSV with the header
    /// `mp_id,surname,first_name,period,start_date,end_date,party`, one row per
    /// tenure. Empty dates default to the period's calendar interval.
    pub fn from_csv(
        reader: impl Read,
        aliases: PartyAliasTable,
        calendar: PeriodCalendar,
    ) -> Result<Self, ResolveError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut order: Vec<String> = Vec::new();
        let mut by_id: HashMap<String, MpRecord> = HashMap::new();
        for row in rdr.deserialize::<MpRow>() {
            let row = row.map_err(|e| ResolveError::Csv {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let interval = calendar.interval(row.period);
            let (start, end) = match (
                row.start_date.or(interval.map(|i| i.0)),
                row.end_date.or(interval.map(|i| i.1)),
            ) {
                (Some(s), Some(e)) => (s, e),
                _ => {
                    return Err(ResolveError::InvalidTenure {
                        mp_id: row.mp_id,
                        message: format!("no dates and unknown period {}", row.period),
                    })
                }
            };
            if start > end {
                return Err(ResolveError::InvalidTenure {
                    mp_id: row.mp_id,
                    message: format!("tenure starts {start} after it ends {end}"),
                });
            }
            let mp = by_id.entry(row.mp_id.clone()).or_insert_with(|| {
                order.push(row.mp_id.clone());
                MpRecord {
                    mp_id: row.mp_id.clone(),
                    surname: row.surname.clone(),
                    first_name: row.first_name.clone(),
                    tenures: Vec::new(),
                    party_history: Vec::new(),
                }
            });
            mp.tenures.push(Tenure {
                period: row.period,
                start,
                end,
            });
            if !row.party.is_empty() {
                let party_id = normalize_party(&row.party, &aliases)
                    .canonical()
                    .map_or(row.party.clone(), str::to_string);
                mp.party_history.push(PartySpell { party_id, start, end });
            }
        }
        let mut mps = Vec::with_capacity(order.len());
        for id in order {
            let mut mp = by_id.remove(&id).expect("id recorded on insert");
            mp.tenures.sort();
            if let Some(w) = mp.tenures.windows(2).find(|w| w[1].start <= w[0].end) {
                return Err(ResolveError::InvalidTenure {
                    mp_id: mp.mp_id,
                    message: format!("tenures in periods {} and {} overlap", w[0].period, w[1].period),
                });
            }
            mp.party_history.sort_by_key(|p| p.start);
            mps.push(mp);
        }
        Ok(Self::new(mps, aliases, calendar))
    }

    pub fn is_loaded(&self) -> bool {
        !self.mps.is_empty()
    }

    pub fn mps(&self) -> &[MpRecord] {
        &self.mps
    }

    pub fn mp(&self, mp_id: &str) -> Option<&MpRecord> {
        self.mps.iter().find(|m| m.mp_id == mp_id)
    }

    /// Folded surname with the misspelling map applied.
    pub fn surname_key(&self, surname: &str) -> String {
        let k = fold_key(surname);
        self.surname_variants.get(&k).cloned().unwrap_or(k)
    }

    /// Folded first name with the first-name variant map applied.
    pub fn first_name_key(&self, first_name: &str) -> String {
        let k = fold_key(first_name);
        self.first_name_variants.get(&k).cloned().unwrap_or(k)
    }

    pub fn surname_candidates(&self, surname: &str) -> &[usize] {
        self.by_surname
            .get(&self.surname_key(surname))
            .map_or(&[], Vec::as_slice)
    }

    pub fn name_candidates(&self, surname: &str, first_name: &str) -> &[usize] {
        self.by_name
            .get(&(self.surname_key(surname), self.first_name_key(first_name)))
            .map_or(&[], Vec::as_slice)
    }
}

/// Which rule settled a speaker, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    UniqueSurname,
    UniqueName,
    Tenure,
    Unresolved,
}

/// Decides the MP for a speaker. A given first name that matches none of
/// several same-surname candidates leaves the speaker unresolved.
pub fn resolve_index(speaker: &SpeakerRef, date: NaiveDate, tables: &ResolutionTables) -> (Option<usize>, Resolution) {
    let by_surname = tables.surname_candidates(&speaker.surname);
    if by_surname.len() == 1 {
        return (Some(by_surname[0]), Resolution::UniqueSurname);
    }
    let pool = if fold_key(&speaker.first_name).is_empty() {
        by_surname
    } else {
        let by_name = tables.name_candidates(&speaker.surname, &speaker.first_name);
        if by_name.len() == 1 {
            return (Some(by_name[0]), Resolution::UniqueName);
        }
        by_name
    };
    let mut serving = pool.iter().filter(|&&i| tables.mps[i].serves_on(date));
    match (serving.next(), serving.next()) {
        (Some(&i), None) => (Some(i), Resolution::Tenure),
        _ => (None, Resolution::Unresolved),
    }
}

pub fn resolve_speaker(
    speaker: &SpeakerRef,
    date: NaiveDate,
    tables: &ResolutionTables,
) -> Result<SpeakerRef, ResolveError> {
    if !tables.is_loaded() {
        return Err(ResolveError::TablesNotLoaded);
    }
    let mut out = speaker.clone();
    match resolve_index(speaker, date, tables).0 {
        Some(i) => {
            out.resolved_mp_id = Some(tables.mps[i].mp_id.clone());
            out.ambiguous = false;
        }
        None => {
            out.resolved_mp_id = None;
            out.ambiguous = tables.surname_candidates(&speaker.surname).len() >= 2;
        }
    }
    Ok(out)
}

/// Resolves the speaker and normalizes the party string of one record.
pub fn resolve_record(record: &mut SpeechContribution, tables: &ResolutionTables) -> Result<(), ResolveError> {
    record.speaker = resolve_speaker(&record.speaker, record.date, tables)?;
    record.speaker.party.canonical = normalize_party(&record.speaker.party.raw, &tables.aliases)
        .canonical()
        .map(str::to_string);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    const CSV: &str = "mp_id,surname,first_name,period,start_date,end_date,party
11001938,Schäuble,Wolfgang,19,,,CDU
m1,Müller,Hans,18,2013-10-22,2017-10-24,SPD
m2,Müller,Gerd,19,2017-10-24,2021-10-26,CSU
m3,Meier,Anna,19,,,SPD
m4,Meier,Anna,20,,,SPD
m5,Meier,Anna,18,,,Freie Demokratische Partei
";

    fn tables() -> ResolutionTables {
        ResolutionTables::from_csv(CSV.as_bytes(), PartyAliasTable::default(), PeriodCalendar::default()).unwrap()
    }

    fn speaker(first: &str, surname: &str) -> SpeakerRef {
        SpeakerRef {
            raw_name: format!("{first} {surname}"),
            first_name: first.into(),
            surname: surname.into(),
            ..SpeakerRef::default()
        }
    }

    #[test]
    fn unique_surname() {
        let r = resolve_speaker(&speaker("", "Schäuble"), d("2019-01-01"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id.as_deref(), Some("11001938"));
        assert!(!r.ambiguous);
        let r = resolve_speaker(&speaker("", "SCHAEUBLE"), d("2019-01-01"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id.as_deref(), Some("11001938"));
    }

    #[test]
    fn tenure_alignment() {
        let r = resolve_speaker(&speaker("", "Müller"), d("2019-01-01"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id.as_deref(), Some("m2"));
    }

    #[test]
    fn overlapping_tenures_stay_ambiguous() {
        // 2017-10-24 lies in both Müller tenures.
        let r = resolve_speaker(&speaker("", "Müller"), d("2017-10-24"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id, None);
        assert!(r.ambiguous);
    }

    #[test]
    fn unique_name_pair() {
        let r = resolve_speaker(&speaker("Hans", "Müller"), d("2019-01-01"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id.as_deref(), Some("m1"));
    }

    #[test]
    fn unknown_first_name_is_not_forced() {
        let r = resolve_speaker(&speaker("Peter", "Müller"), d("2019-01-01"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id, None);
        assert!(r.ambiguous);
    }

    #[test]
    fn unknown_surname_is_unresolved_not_ambiguous() {
        let r = resolve_speaker(&speaker("", "Niemand"), d("2019-01-01"), &tables()).unwrap();
        assert_eq!(r.resolved_mp_id, None);
        assert!(!r.ambiguous);
    }

    #[test]
    fn multi_period_rows_merge_into_one_mp() {
        let t = tables();
        let anna = t.mp("m3").unwrap();
        assert_eq!(anna.tenures.len(), 1);
        assert_eq!(t.mp("m5").unwrap().party_history[0].party_id, "FDP");
        assert_eq!(t.mp("11001938").unwrap().tenures[0].start, d("2017-10-24"));
    }

    #[test]
    fn empty_tables() {
        let t = ResolutionTables::default();
        assert_eq!(
            resolve_speaker(&speaker("", "X"), d("2019-01-01"), &t),
            Err(ResolveError::TablesNotLoaded)
        );
    }

    #[test]
    fn overlapping_tenures_rejected() {
        let csv = "mp_id,surname,first_name,period,start_date,end_date,party\nx,A,B,19,2018-01-01,2019-01-01,\nx,A,B,20,2018-06-01,2020-01-01,\n";
        assert!(matches!(
            ResolutionTables::from_csv(csv.as_bytes(), PartyAliasTable::default(), PeriodCalendar::default()),
            Err(ResolveError::InvalidTenure { .. })
        ));
    }

    #[test]
    fn misspelling_map() {
        let mut surnames = HashMap::new();
        surnames.insert(fold_key("Schäubele"), fold_key("Schäuble"));
        let t = tables().with_variants(surnames, HashMap::new());
        let r = resolve_speaker(&speaker("", "Schäubele"), d("2019-01-01"), &t).unwrap();
        assert_eq!(r.resolved_mp_id.as_deref(), Some("11001938"));
    }

    #[test]
    fn resolve_record_sets_party() {
        let mut r: SpeechContribution = serde_json::from_str(
            r#"{"id":"19-1-1-1","legislative_period":19,"session_number":1,"agenda_number":1,"agenda_type":"",
            "agenda_description":"","date":"2019-01-01","speaker":{"raw_name":"Hans Müller","first_name":"Hans",
            "surname":"Müller","party":{"raw":"F.D.P."}},"role":"member","source_uri":"","text":"",
            "sentences":[],"annotations":[]}"#,
        )
        .unwrap();
        resolve_record(&mut r, &tables()).unwrap();
        assert_eq!(r.speaker.resolved_mp_id.as_deref(), Some("m1"));
        assert_eq!(r.speaker.party.canonical.as_deref(), Some("FDP"));
    }
}
