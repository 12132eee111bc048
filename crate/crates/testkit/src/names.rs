//! Random MP databases and a brute-force enumerator of resolution candidates.

use chrono::{Duration, NaiveDate};
use plenum_core::resolve::{MpRecord, Tenure};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::fold;

const SURNAMES: &[&str] = &["Müller", "Schmidt", "Schäuble", "Meier", "Weiß", "Özdemir"];
const FIRST_NAMES: &[&str] = &["Hans", "Anna", "Jürgen", "Gerd", "Eva"];

fn day(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// A small database with frequent name collisions and tenure overlaps.
pub fn random_db(rng: &mut impl Rng) -> Vec<MpRecord> {
    let n = rng.gen_range(1..10);
    (0..n)
        .map(|i| {
            let mut tenures = Vec::new();
            let mut cursor = day(2000, 1, 1) + Duration::days(rng.gen_range(0..1500));
            for p in 0..rng.gen_range(1..4) {
                let start = cursor;
                let end = start + Duration::days(rng.gen_range(30..1500));
                tenures.push(Tenure {
                    period: 14 + p,
                    start,
                    end,
                });
                cursor = end + Duration::days(rng.gen_range(1..800));
            }
            MpRecord {
                mp_id: format!("mp{i}"),
                surname: SURNAMES.choose(rng).unwrap().to_string(),
                first_name: FIRST_NAMES.choose(rng).unwrap().to_string(),
                tenures,
                party_history: Vec::new(),
            }
        })
        .collect()
}

/// A speaker name query: surname with random case or umlaut transliteration,
/// and a first name that may be missing or unknown.
pub fn random_name(rng: &mut impl Rng) -> (String, String) {
    let s = SURNAMES.choose(rng).unwrap();
    let surname = match rng.gen_range(0..3) {
        0 => s.to_uppercase(),
        1 => s.replace('ü', "ue").replace('ä', "ae").replace('Ö', "Oe"),
        _ => s.to_string(),
    };
    let first = match rng.gen_range(0..4) {
        0 => String::new(),
        1 => "Karl".into(),
        _ => FIRST_NAMES.choose(rng).unwrap().to_string(),
    };
    (first, surname)
}

pub fn random_date(rng: &mut impl Rng) -> NaiveDate {
    day(2000, 1, 1) + Duration::days(rng.gen_range(0..9000))
}

/// The rule that decided a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    UniqueSurname,
    UniqueName,
    Tenure,
    Unresolved,
}

/// Expected outcome derived by enumerating the database.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expected {
    pub mp_id: Option<String>,
    pub ambiguous: bool,
    pub branch: Branch,
}

pub fn expected(db: &[MpRecord], first: &str, surname: &str, date: NaiveDate) -> Expected {
    let same_surname: Vec<&MpRecord> = db.iter().filter(|m| fold(&m.surname) == fold(surname)).collect();
    let decided = |set: &[&MpRecord]| (set.len() == 1).then(|| set[0].mp_id.clone());
    let mut branch = Branch::UniqueSurname;
    let mut id = decided(&same_surname);
    if id.is_none() {
        let pool: Vec<&MpRecord> = if first.trim().is_empty() {
            same_surname.clone()
        } else {
            let pair: Vec<&MpRecord> = same_surname
                .iter()
                .copied()
                .filter(|m| fold(&m.first_name) == fold(first))
                .collect();
            branch = Branch::UniqueName;
            id = decided(&pair);
            pair
        };
        if id.is_none() {
            let serving: Vec<&MpRecord> = pool
                .into_iter()
                .filter(|m| m.tenures.iter().any(|t| t.start <= date && date <= t.end))
                .collect();
            branch = Branch::Tenure;
            id = decided(&serving);
        }
    }
    if id.is_none() {
        branch = Branch::Unresolved;
    }
    Expected {
        ambiguous: id.is_none() && same_surname.len() >= 2,
        mp_id: id,
        branch,
    }
}
