//! Seeded generator of valid synthetic speech contributions.

use std::collections::HashMap;

use chrono::{Duration, NaiveDate};
use plenum_core::annotate::{detect_calls_to_order, CtoRuleSet};
use plenum_core::calendar::PeriodCalendar;
use plenum_core::model::{
    PartyRef, Role, SpanAnnotation, SpanKind, SpeakerRef, SpeechContribution, TopicLabel, TopicVocabulary,
};
use plenum_core::party::PartyAliasTable;
use plenum_core::segment::segment;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const WORDS: &[&str] = &[
    "Klimawandel",
    "Migration",
    "Energiewende",
    "Atomausstieg",
    "Rente",
    "Bundeswehr",
    "Steuer",
    "Schule",
    "Gesundheit",
    "Pflege",
    "Digitalisierung",
    "Mieten",
    "Landwirtschaft",
    "Europa",
    "Sicherheit",
    "Freiheit",
    "Demokratie",
    "Bürger",
    "Regierung",
    "Opposition",
    "Haushalt",
    "Gesetz",
    "Antrag",
    "Ausschuss",
    "über",
    "für",
    "die",
    "der",
    "und",
    "nicht",
    "wir",
    "Sie",
    "Zukunft",
    "Kinder",
    "Arbeit",
    "Löhne",
    "Wirtschaft",
    "Straße",
    "Größe",
    "Maß",
    "Ökologie",
    "Überwachung",
    "Zölle",
    "Merkel",
    "CDU",
    "SPD",
    "Linke",
    "Verfassung",
    "Recht",
    "Ordnung",
    "Kohle",
    "Wohnungsbau",
    "Grundgesetz",
    "Wähler",
    "Haushaltsausschuss",
    "Inflation",
];

pub const SPEAKERS: &[(&str, &str)] = &[
    ("Angela", "Merkel"),
    ("Olaf", "Scholz"),
    ("Wolfgang", "Schäuble"),
    ("Bärbel", "Bas"),
    ("Katja", "Mast"),
    ("Christian", "Lindner"),
    ("Sahra", "Wagenknecht"),
    ("Gerd", "Müller"),
    ("Sepp", "Müller"),
    ("Alice", "Weidel"),
    ("Jürgen", "Trittin"),
    ("Annalena", "Baerbock"),
];

pub const RAW_PARTIES: &[&str] = &[
    "CDU/CSU",
    "SPD",
    "FDP",
    "F.D.P.",
    "BÜNDNIS 90/DIE GRÜNEN",
    "DIE LINKE",
    "AfD",
    "fraktionslos",
    "Piratenpartei",
    "",
];

/// Deterministic corpus generator.
pub struct CorpusGen {
    rng: ChaCha8Rng,
    calendar: PeriodCalendar,
    aliases: PartyAliasTable,
    topics: TopicVocabulary,
    rules: CtoRuleSet,
    seq: HashMap<(u32, u32), u32>,
}

impl CorpusGen {
    pub fn new(seed: u64) -> Self {
        use rand::SeedableRng;
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            calendar: PeriodCalendar::default(),
            aliases: PartyAliasTable::default(),
            topics: TopicVocabulary::default(),
            rules: CtoRuleSet::default(),
            seq: HashMap::new(),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn word(&mut self) -> &'static str {
        // Skewed towards the front of the list so document frequencies vary.
        let n = WORDS.len();
        let i = (self.rng.gen::<f64>().powi(2) * n as f64) as usize;
        WORDS[i.min(n - 1)]
    }

    fn sentence(&mut self) -> String {
        let len = self.rng.gen_range(3..12);
        let mut words: Vec<String> = (0..len).map(|_| self.word().to_string()).collect();
        if self.rng.gen_bool(0.3) {
            words[0] = words[0].to_uppercase();
        }
        let end = *[".", ".", ".", "!", "?"].choose(&mut self.rng).unwrap();
        format!("{}{end}", words.join(" "))
    }

    /// Text blocks joined by newlines; returns text and interjection ranges.
    fn text(&mut self, president: bool) -> (String, Vec<(usize, usize)>) {
        let mut text = String::new();
        let mut spans = Vec::new();
        let blocks = self.rng.gen_range(1..4);
        for b in 0..blocks {
            if b > 0 {
                text.push('\n');
            }
            let sentences = self.rng.gen_range(1..4);
            let body: Vec<String> = (0..sentences).map(|_| self.sentence()).collect();
            text.push_str(&body.join(" "));
            if president && self.rng.gen_bool(0.2) {
                text.push_str(" Ich rufe Sie zur Ordnung.");
            }
            if self.rng.gen_bool(0.3) {
                text.push('\n');
                let start = text.chars().count();
                let words: Vec<&str> = (0..self.rng.gen_range(2..5)).map(|_| self.word()).collect();
                text.push_str(&format!("(Beifall bei der {})", words.join(" ")));
                spans.push((start, text.chars().count()));
            }
        }
        (text, spans)
    }

    pub fn record(&mut self) -> SpeechContribution {
        let period = self.rng.gen_range(1..=20);
        let (start, end) = self.calendar.interval(period).unwrap();
        let days = (end - start).num_days();
        let date: NaiveDate = start + Duration::days(self.rng.gen_range(0..=days));
        let session = self.rng.gen_range(1..=40);
        let agenda = self.rng.gen_range(0..=12);
        let seq = {
            let s = self.seq.entry((period, session)).or_insert(0);
            *s += 1;
            *s
        };
        let role = *[
            Role::President,
            Role::Member,
            Role::Member,
            Role::Member,
            Role::Government,
            Role::Guest,
            Role::Unknown,
        ]
        .choose(&mut self.rng)
        .unwrap();
        let (first, surname) = *SPEAKERS.choose(&mut self.rng).unwrap();
        let raw_party = if role == Role::President {
            ""
        } else {
            *RAW_PARTIES.choose(&mut self.rng).unwrap()
        };
        let (text, interjections) = self.text(role == Role::President);
        let topic = if role == Role::President {
            Some(TopicLabel::presidency())
        } else if self.rng.gen_bool(0.7) {
            let domain: Vec<&str> = self.topics.domain_topics().collect();
            Some(TopicLabel {
                label: domain.choose(&mut self.rng).unwrap().to_string(),
                confidence: (self.rng.gen_range(0..=100) as f64) / 100.0,
            })
        } else {
            None
        };
        let mut r = SpeechContribution {
            id: format!("{period}-{session}-{agenda}-{seq}"),
            legislative_period: period,
            session_number: session,
            agenda_number: agenda,
            agenda_type: if agenda == 0 {
                String::new()
            } else {
                "Tagesordnungspunkt".into()
            },
            agenda_description: String::new(),
            date,
            speaker: SpeakerRef {
                raw_name: format!("{first} {surname}"),
                first_name: first.into(),
                surname: surname.into(),
                resolved_mp_id: None,
                party: PartyRef {
                    raw: raw_party.into(),
                    canonical: self.aliases.lookup(raw_party).map(str::to_string),
                },
                ambiguous: false,
            },
            role,
            topic,
            source_uri: format!("synthetic://{period}/{session}"),
            sentences: segment(&text),
            text,
            annotations: interjections
                .into_iter()
                .map(|(s, e)| SpanAnnotation::new(SpanKind::Interjection, s, e, "", "synthetic"))
                .collect(),
        };
        let cto = detect_calls_to_order(&r, &self.rules);
        r.annotations.extend(cto);
        r
    }

    pub fn corpus(&mut self, n: usize) -> Vec<SpeechContribution> {
        (0..n).map(|_| self.record()).collect()
    }
}
