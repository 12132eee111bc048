//! Bundestag open-data plenary protocol pipeline.
//!
//! Supported subset:
//!
//! ```xml
//! <dbtplenarprotokoll wahlperiode="19" sitzung-nr="183" sitzung-datum="02.10.2020">
//!   <sitzungsverlauf>
//!     <sitzungsbeginn>
//!       <name>Präsident Dr. Wolfgang Schäuble:</name>
//!       <p klasse="J_1">...</p>
//!     </sitzungsbeginn>
//!     <tagesordnungspunkt top-id="Tagesordnungspunkt 1">
//!       <p klasse="T_NaS">agenda description</p>
//!       <rede id="ID1918300100">
//!         <p klasse="redner"><redner id="11001938"><name>
//!           <titel>Dr.</titel><vorname>Angela</vorname><nachname>Merkel</nachname>
//!           <fraktion>CDU/CSU</fraktion>
//!         </name></redner>Dr. Angela Merkel (CDU/CSU):</p>
//!         <p klasse="J_1">...</p>
//!         <kommentar>(Beifall bei der CDU/CSU)</kommentar>
//!         <name>Präsident Dr. Wolfgang Schäuble:</name>
//!         <p klasse="J_1">...</p>
//!       </rede>
//!     </tagesordnungspunkt>
//!   </sitzungsverlauf>
//! </dbtplenarprotokoll>
//! ```
//!
//! A `name` element opens a turn of the presiding officer; a `redner`
//! paragraph opens (or resumes) a turn of the named speaker.

use chrono::NaiveDate;
use tracing::warn;

use super::text::{clean_speaker_label, normalize_ws, split_name, Agenda, SessionMeta, Turn};
use super::{IngestError, RawSessionDoc, Schema};
use crate::model::{Role, SpeechContribution};
use crate::xml::Element;

pub const ANNOTATOR: &str = "bundestag-kommentar";

pub const ROOT: &str = "dbtplenarprotokoll";

fn root_attr<'a>(doc: &RawSessionDoc, root: &'a Element, name: &str) -> Result<&'a str, IngestError> {
    root.attr(name)
        .ok_or_else(|| IngestError::schema(doc, root.line, ROOT, format!("missing attribute {name}")))
}

fn positive(doc: &RawSessionDoc, root: &Element, name: &str) -> Result<u32, IngestError> {
    let raw = root_attr(doc, root, name)?;
    raw.trim().parse::<u32>().ok().filter(|&n| n >= 1).ok_or_else(|| {
        IngestError::schema(
            doc,
            root.line,
            ROOT,
            format!("attribute {name} must be a positive integer, got {raw:?}"),
        )
    })
}

pub(crate) fn session_date(raw: &str) -> Option<NaiveDate> {
    let raw = raw.trim();
    NaiveDate::parse_from_str(raw, "%d.%m.%Y")
        .or_else(|_| NaiveDate::parse_from_str(raw, "%Y-%m-%d"))
        .ok()
}

/// Sortable key `PP-SSS` identifying a session across fetches.
pub(crate) fn session_key(root: &Element) -> Option<String> {
    let period: u32 = root.attr("wahlperiode")?.trim().parse().ok()?;
    let session: u32 = root.attr("sitzung-nr")?.trim().parse().ok()?;
    Some(format!("{period:02}-{session:03}"))
}

pub fn parse_bundestag(doc: &RawSessionDoc) -> Result<Vec<SpeechContribution>, IngestError> {
    if doc.schema != Schema::Bundestag {
        return Err(IngestError::schema(
            doc,
            1,
            ROOT,
            "document is not declared as bundestag",
        ));
    }
    let root = doc.parse_xml()?;
    if root.name != ROOT {
        return Err(IngestError::schema(
            doc,
            root.line,
            &root.name,
            format!("expected root element {ROOT}"),
        ));
    }
    let period = positive(doc, &root, "wahlperiode")?;
    let session = positive(doc, &root, "sitzung-nr")?;
    let raw_date = root_attr(doc, &root, "sitzung-datum")?;
    let date = session_date(raw_date)
        .ok_or_else(|| IngestError::schema(doc, root.line, ROOT, format!("bad sitzung-datum {raw_date:?}")))?;
    let course = root
        .child("sitzungsverlauf")
        .ok_or_else(|| IngestError::schema(doc, root.line, "sitzungsverlauf", "missing mandatory element"))?;

    let meta = SessionMeta {
        period,
        session,
        date,
        source_uri: doc.source_uri.clone(),
    };
    let mut walker = Walker {
        doc,
        turns: Vec::new(),
        current: None,
    };
    for section in course.elements() {
        match section.name.as_str() {
            "sitzungsbeginn" => walker.section(section, &Agenda::default()),
            "tagesordnungspunkt" => {
                let agenda = agenda_of(section);
                walker.section(section, &agenda);
            }
            "sitzungsende" => {}
            other => warn!(uri = %doc.source_uri, line = section.line, element = other, "unsupported element ignored"),
        }
    }
    walker.flush();
    Ok(super::text::finish_turns(&meta, walker.turns, ANNOTATOR))
}

/// `top-id="Zusatzpunkt 3"` gives type "Zusatzpunkt" and number 3; the
/// description joins the section's `T_*` paragraphs.
fn agenda_of(top: &Element) -> Agenda {
    let top_id = normalize_ws(top.attr("top-id").unwrap_or_default());
    let (kind, number) = match top_id.rsplit_once(' ') {
        Some((kind, n)) if n.parse::<u32>().is_ok() => (kind.to_string(), n.parse().unwrap()),
        _ => {
            warn!(line = top.line, top_id = %top_id, "agenda item without trailing number, using 0");
            (top_id.clone(), 0)
        }
    };
    let description = top
        .elements()
        .filter(|e| e.name == "p" && is_agenda_paragraph(e))
        .map(|e| normalize_ws(&e.text()))
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    Agenda {
        number,
        kind,
        description,
    }
}

fn is_agenda_paragraph(p: &Element) -> bool {
    p.attr("klasse").is_some_and(|k| k.starts_with('T'))
}

struct Walker<'a> {
    doc: &'a RawSessionDoc,
    turns: Vec<Turn>,
    current: Option<Turn>,
}

impl Walker<'_> {
    fn flush(&mut self) {
        if let Some(turn) = self.current.take() {
            self.turns.push(turn);
        }
    }

    fn section(&mut self, section: &Element, agenda: &Agenda) {
        for el in section.elements() {
            match el.name.as_str() {
                "rede" => {
                    self.flush();
                    for child in el.elements() {
                        self.item(child, agenda);
                    }
                    self.flush();
                }
                "p" if is_agenda_paragraph(el) => {}
                _ => self.item(el, agenda),
            }
        }
    }

    fn item(&mut self, el: &Element, agenda: &Agenda) {
        match el.name.as_str() {
            "name" => {
                self.flush();
                let raw_name = clean_speaker_label(&el.text());
                let (first, surname) = split_name(&raw_name);
                self.current = Some(Turn::new(
                    raw_name,
                    first,
                    surname,
                    String::new(),
                    Role::President,
                    agenda.clone(),
                ));
            }
            "p" if el.attr("klasse") == Some("redner") => {
                self.flush();
                self.current = Some(speaker_turn(el, agenda));
            }
            "p" => match self.current.as_mut() {
                Some(turn) => {
                    turn.text.begin_block();
                    turn.speech(&el.text());
                }
                None => warn!(uri = %self.doc.source_uri, line = el.line, "paragraph without a speaker ignored"),
            },
            "kommentar" => match self.current.as_mut() {
                Some(turn) => {
                    turn.text.begin_block();
                    turn.interjection(&el.text());
                }
                None => warn!(uri = %self.doc.source_uri, line = el.line, "comment without a speaker ignored"),
            },
            other => warn!(uri = %self.doc.source_uri, line = el.line, element = other, "unsupported element ignored"),
        }
    }
}

fn speaker_turn(p: &Element, agenda: &Agenda) -> Turn {
    let Some(name) = p.find("redner").and_then(|r| r.child("name")) else {
        let raw_name = clean_speaker_label(&p.text());
        let (first, surname) = split_name(&raw_name);
        return Turn::new(raw_name, first, surname, String::new(), Role::Unknown, agenda.clone());
    };
    let field = |tag: &str| name.child(tag).map(|e| normalize_ws(&e.text())).unwrap_or_default();
    let first = field("vorname");
    let surname = field("nachname");
    let affix = field("namenszusatz");
    let raw_name = [first.as_str(), affix.as_str(), surname.as_str()]
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    let party = field("fraktion");
    let role = if name.child("rolle").is_some() {
        Role::Government
    } else if !party.is_empty() {
        Role::Member
    } else {
        Role::Guest
    };
    Turn::new(raw_name, first, surname, party, role, agenda.clone())
}
