//! Flattening of markup into contribution text plus speaker-name cleanup,
//! shared by both XML pipelines so that they emit identical text.

use crate::model::{ContributionId, PartyRef, Role, SpanAnnotation, SpanKind, SpeakerRef, SpeechContribution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sep {
    None,
    Space,
    Newline,
}

/// Appends text with whitespace runs collapsed to one space and blocks
/// separated by a newline. Offsets are code points.
#[derive(Debug, Clone)]
pub(crate) struct TextBuilder {
    out: String,
    len: usize,
    sep: Sep,
}

impl TextBuilder {
    pub fn new() -> Self {
        Self {
            out: String::new(),
            len: 0,
            sep: Sep::None,
        }
    }

    pub fn begin_block(&mut self) {
        if self.len > 0 {
            self.sep = Sep::Newline;
        }
    }

    fn push_char(&mut self, c: char) {
        match self.sep {
            Sep::None => {}
            Sep::Space => {
                self.out.push(' ');
                self.len += 1;
            }
            Sep::Newline => {
                self.out.push('\n');
                self.len += 1;
            }
        }
        self.sep = Sep::None;
        self.out.push(c);
        self.len += 1;
    }

    /// Appends `text`, returning the code-point range of its non-whitespace
    /// content (None when it holds only whitespace).
    pub fn push(&mut self, text: &str) -> Option<(usize, usize)> {
        let mut range: Option<(usize, usize)> = None;
        for c in text.chars() {
            if c.is_whitespace() {
                if self.len > 0 && self.sep == Sep::None {
                    self.sep = Sep::Space;
                }
            } else {
                self.push_char(c);
                let pos = self.len;
                range = Some(match range {
                    None => (pos - 1, pos),
                    Some((s, _)) => (s, pos),
                });
            }
        }
        range
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Collapses whitespace runs and trims.
pub(crate) fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

const ROLE_PREFIXES: &[&str] = &[
    "präsident",
    "präsidentin",
    "vizepräsident",
    "vizepräsidentin",
    "alterspräsident",
    "alterspräsidentin",
];

const PARTICLES: &[&str] = &[
    "von", "vom", "zu", "zur", "van", "de", "der", "den", "di", "freiherr", "graf",
];

/// Strips a presiding-office prefix, academic titles, a trailing party
/// parenthesis and the closing colon from a speaker label.
/// `"Präsident Dr. Wolfgang Schäuble:"` becomes `"Wolfgang Schäuble"`.
pub(crate) fn clean_speaker_label(label: &str) -> String {
    let mut s = normalize_ws(label);
    if let Some(stripped) = s.strip_suffix(':') {
        s = stripped.trim_end().to_string();
    }
    if let Some(open) = s.find('(') {
        if s.ends_with(')') {
            s = s[..open].trim_end().to_string();
        }
    }
    let tokens: Vec<&str> = s.split(' ').filter(|t| !t.is_empty()).collect();
    let mut i = 0;
    if tokens
        .first()
        .is_some_and(|t| ROLE_PREFIXES.contains(&t.to_lowercase().as_str()))
    {
        i = 1;
    }
    tokens[i..]
        .iter()
        .filter(|t| !is_title(t))
        .copied()
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_title(token: &str) -> bool {
    token.ends_with('.') && token.chars().count() > 1
}

/// Splits a cleaned display name into (first name, surname). Name particles
/// such as "von" are dropped from both parts.
pub(crate) fn split_name(name: &str) -> (String, String) {
    let tokens: Vec<&str> = name.split_whitespace().filter(|t| !is_title(t)).collect();
    let Some((last, rest)) = tokens.split_last() else {
        return (String::new(), String::new());
    };
    let first = rest
        .iter()
        .filter(|t| !PARTICLES.contains(&t.to_lowercase().as_str()))
        .copied()
        .collect::<Vec<_>>()
        .join(" ");
    (first, last.to_string())
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Agenda {
    pub number: u32,
    pub kind: String,
    pub description: String,
}

/// Session-level metadata common to both schemas.
#[derive(Debug, Clone)]
pub(crate) struct SessionMeta {
    pub period: u32,
    pub session: u32,
    pub date: chrono::NaiveDate,
    pub source_uri: String,
}

/// One speaker turn under construction.
#[derive(Debug, Clone)]
pub(crate) struct Turn {
    pub speaker: SpeakerRef,
    pub role: Role,
    pub agenda: Agenda,
    pub text: TextBuilder,
    pub interjections: Vec<(usize, usize)>,
}

impl Turn {
    pub fn new(
        raw_name: String,
        first_name: String,
        surname: String,
        raw_party: String,
        role: Role,
        agenda: Agenda,
    ) -> Self {
        Self {
            speaker: SpeakerRef {
                raw_name,
                first_name,
                surname,
                party: PartyRef {
                    raw: raw_party,
                    canonical: None,
                },
                ..Default::default()
            },
            role,
            agenda,
            text: TextBuilder::new(),
            interjections: Vec::new(),
        }
    }

    pub fn speech(&mut self, text: &str) {
        self.text.push(text);
    }

    pub fn interjection(&mut self, text: &str) {
        if let Some(range) = self.text.push(text) {
            self.interjections.push(range);
        }
    }
}

/// Turns collected turns into records, dropping empty ones and numbering the
/// rest in document order.
pub(crate) fn finish_turns(meta: &SessionMeta, turns: Vec<Turn>, annotator: &str) -> Vec<SpeechContribution> {
    turns
        .into_iter()
        .filter(|t| !t.text.is_empty())
        .enumerate()
        .map(|(i, t)| {
            let id = ContributionId {
                period: meta.period,
                session: meta.session,
                agenda: t.agenda.number,
                seq: i as u32 + 1,
            };
            SpeechContribution {
                id: id.to_string(),
                legislative_period: meta.period,
                session_number: meta.session,
                agenda_number: t.agenda.number,
                agenda_type: t.agenda.kind,
                agenda_description: t.agenda.description,
                date: meta.date,
                speaker: t.speaker,
                role: t.role,
                topic: None,
                source_uri: meta.source_uri.clone(),
                text: t.text.finish(),
                sentences: Vec::new(),
                annotations: t
                    .interjections
                    .into_iter()
                    .map(|(s, e)| SpanAnnotation::new(SpanKind::Interjection, s, e, "", annotator))
                    .collect(),
            }
        })
        .collect()
}
