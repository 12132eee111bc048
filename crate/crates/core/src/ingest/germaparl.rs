//! GermaParl TEI pipeline.
//!
//! Supported subset:
//!
//! ```xml
//! <TEI>
//!   <teiHeader><fileDesc>
//!     <legislativePeriod>19</legislativePeriod>
//!     <sessionNo>183</sessionNo>
//!     <date when="2020-10-02"/>
//!   </fileDesc></teiHeader>
//!   <text><body>
//!     <div type="agenda_item" n="1" what="Tagesordnungspunkt" desc="...">
//!       <sp who="Wolfgang Schäuble" parliamentary_group="CDU/CSU" party="CDU" role="presidency">
//!         <speaker>Präsident Dr. Wolfgang Schäuble:</speaker>
//!         <p>... <stage>(Zuruf)</stage> ...</p>
//!         <stage>(Beifall bei der CDU/CSU)</stage>
//!       </sp>
//!     </div>
//!   </body></text>
//! </TEI>
//! ```
//!
//! `sp` may also sit directly in `body` or in a non-agenda `div`; those turns
//! get agenda number 0. A `stage` between turns belongs to the preceding turn.

use chrono::NaiveDate;
use tracing::warn;

use super::text::{normalize_ws, split_name, Agenda, SessionMeta, Turn};
use super::{IngestError, RawSessionDoc, Schema};
use crate::model::{Role, SpeechContribution};
use crate::xml::{Element, Node};

pub const ANNOTATOR: &str = "germaparl-stage";

fn role_of(attr: Option<&str>) -> Role {
    match attr.map(|s| s.trim().to_lowercase()).as_deref() {
        Some("presidency" | "president") => Role::President,
        Some("mp" | "member") => Role::Member,
        Some("government") => Role::Government,
        Some("guest" | "misc") => Role::Guest,
        _ => Role::Unknown,
    }
}

fn header_value<'a>(doc: &RawSessionDoc, header: &'a Element, name: &str) -> Result<&'a Element, IngestError> {
    header
        .find(name)
        .ok_or_else(|| IngestError::schema(doc, header.line, name, "missing mandatory element"))
}

fn number(doc: &RawSessionDoc, el: &Element) -> Result<u32, IngestError> {
    let text = el.text();
    text.trim().parse::<u32>().ok().filter(|&n| n >= 1).ok_or_else(|| {
        IngestError::schema(
            doc,
            el.line,
            &el.name,
            format!("expected a positive integer, got {:?}", text.trim()),
        )
    })
}

pub fn parse_germaparl(doc: &RawSessionDoc) -> Result<Vec<SpeechContribution>, IngestError> {
    if doc.schema != Schema::Germaparl {
        return Err(IngestError::schema(
            doc,
            1,
            "TEI",
            "document is not declared as germaparl",
        ));
    }
    let root = doc.parse_xml()?;
    if root.name != "TEI" {
        return Err(IngestError::schema(
            doc,
            root.line,
            &root.name,
            "expected root element TEI",
        ));
    }
    let header = root
        .child("teiHeader")
        .ok_or_else(|| IngestError::schema(doc, root.line, "teiHeader", "missing mandatory element"))?;
    let period = number(doc, header_value(doc, header, "legislativePeriod")?)?;
    let session = number(doc, header_value(doc, header, "sessionNo")?)?;
    let date_el = header_value(doc, header, "date")?;
    let when = date_el
        .attr("when")
        .ok_or_else(|| IngestError::schema(doc, date_el.line, "date", "missing attribute when"))?;
    let date = NaiveDate::parse_from_str(when.trim(), "%Y-%m-%d")
        .map_err(|e| IngestError::schema(doc, date_el.line, "date", format!("bad date {when:?}: {e}")))?;
    let body = root
        .child("text")
        .and_then(|t| t.child("body"))
        .ok_or_else(|| IngestError::schema(doc, root.line, "body", "missing mandatory element text/body"))?;

    let meta = SessionMeta {
        period,
        session,
        date,
        source_uri: doc.source_uri.clone(),
    };
    let mut turns = Vec::new();
    walk_container(doc, body, &Agenda::default(), &mut turns)?;
    Ok(super::text::finish_turns(&meta, turns, ANNOTATOR))
}

fn agenda_of(div: &Element, inherited: &Agenda) -> Agenda {
    if div.attr("type") != Some("agenda_item") {
        return inherited.clone();
    }
    let number = div.attr("n").and_then(|n| n.trim().parse().ok()).unwrap_or_else(|| {
        warn!(line = div.line, n = ?div.attr("n"), "agenda item without numeric n, using 0");
        0
    });
    Agenda {
        number,
        kind: normalize_ws(div.attr("what").unwrap_or("Tagesordnungspunkt")),
        description: normalize_ws(div.attr("desc").unwrap_or_default()),
    }
}

fn walk_container(
    doc: &RawSessionDoc,
    container: &Element,
    agenda: &Agenda,
    turns: &mut Vec<Turn>,
) -> Result<(), IngestError> {
    for node in &container.children {
        let el = match node {
            Node::Element(el) => el,
            Node::Text(t) if t.trim().is_empty() => continue,
            Node::Text(t) => {
                warn!(uri = %doc.source_uri, text = %t.trim(), "ignoring stray text outside a speaker turn");
                continue;
            }
        };
        match el.name.as_str() {
            "div" => walk_container(doc, el, &agenda_of(el, agenda), turns)?,
            "sp" => turns.push(parse_sp(doc, el, agenda)?),
            "stage" => match turns.last_mut() {
                Some(turn) => {
                    turn.text.begin_block();
                    turn.interjection(&el.text());
                }
                None => warn!(uri = %doc.source_uri, line = el.line, "stage direction before the first turn ignored"),
            },
            other => warn!(uri = %doc.source_uri, line = el.line, element = other, "unsupported element ignored"),
        }
    }
    Ok(())
}

fn parse_sp(doc: &RawSessionDoc, sp: &Element, agenda: &Agenda) -> Result<Turn, IngestError> {
    let who = sp
        .attr("who")
        .ok_or_else(|| IngestError::schema(doc, sp.line, "sp", "missing attribute who"))?;
    let raw_name = normalize_ws(who);
    let (first, surname) = split_name(&raw_name);
    let party = sp
        .attr("parliamentary_group")
        .filter(|p| !p.trim().is_empty())
        .or_else(|| sp.attr("party"))
        .map(normalize_ws)
        .unwrap_or_default();
    let mut turn = Turn::new(
        raw_name,
        first,
        surname,
        party,
        role_of(sp.attr("role")),
        agenda.clone(),
    );
    for child in sp.elements() {
        match child.name.as_str() {
            "speaker" => {}
            "p" => {
                turn.text.begin_block();
                for node in &child.children {
                    match node {
                        Node::Text(t) => turn.speech(t),
                        Node::Element(inline) if inline.name == "stage" => turn.interjection(&inline.text()),
                        Node::Element(inline) => turn.speech(&inline.text()),
                    }
                }
            }
            "stage" => {
                turn.text.begin_block();
                turn.interjection(&child.text());
            }
            other => {
                warn!(uri = %doc.source_uri, line = child.line, element = other, "unsupported element in sp ignored")
            }
        }
    }
    Ok(turn)
}
