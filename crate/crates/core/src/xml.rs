//! Minimal element tree on top of quick-xml, keeping line numbers and byte
//! ranges for error context.

use std::ops::Range;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct XmlError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    Element(Element),
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    /// Local name, namespace prefix stripped.
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Node>,
    pub line: usize,
    /// Byte range of the element in the source, tags included.
    pub span: Range<usize>,
}

impl Element {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.children.iter().filter_map(|n| match n {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        })
    }

    pub fn child(&self, name: &str) -> Option<&Element> {
        self.elements().find(|e| e.name == name)
    }

    /// First descendant (depth-first, document order) with the given name.
    pub fn find(&self, name: &str) -> Option<&Element> {
        for e in self.elements() {
            if e.name == name {
                return Some(e);
            }
            if let Some(found) = e.find(name) {
                return Some(found);
            }
        }
        None
    }

    /// Concatenated text content of the subtree.
    pub fn text(&self) -> String {
        let mut out = String::new();
        self.collect_text(&mut out);
        out
    }

    fn collect_text(&self, out: &mut String) {
        for n in &self.children {
            match n {
                Node::Text(t) => out.push_str(t),
                Node::Element(e) => e.collect_text(out),
            }
        }
    }
}

struct LineIndex(Vec<usize>);

impl LineIndex {
    fn new(bytes: &[u8]) -> Self {
        let mut starts = vec![0];
        starts.extend(
            bytes
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == b'\n')
                .map(|(i, _)| i + 1),
        );
        Self(starts)
    }

    fn line(&self, pos: usize) -> usize {
        match self.0.binary_search(&pos) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }
}

fn open(start: &BytesStart<'_>, line: usize, begin: usize, lines: &LineIndex) -> Result<Element, XmlError> {
    let name = String::from_utf8_lossy(start.local_name().as_ref()).into_owned();
    let mut attrs = Vec::new();
    for attr in start.attributes() {
        let attr = attr.map_err(|e| XmlError {
            line,
            message: e.to_string(),
        })?;
        let key = String::from_utf8_lossy(attr.key.local_name().as_ref()).into_owned();
        let value = attr
            .unescape_value()
            .map_err(|e| XmlError {
                line: lines.line(begin),
                message: e.to_string(),
            })?
            .into_owned();
        attrs.push((key, value));
    }
    Ok(Element {
        name,
        attrs,
        children: Vec::new(),
        line,
        span: begin..begin,
    })
}

/// Parses a complete document and returns its root element.
pub fn parse(bytes: &[u8]) -> Result<Element, XmlError> {
    let lines = LineIndex::new(bytes);
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(false);
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let begin = reader.buffer_position() as usize;
        let event = reader.read_event().map_err(|e| XmlError {
            line: lines.line(reader.error_position() as usize),
            message: e.to_string(),
        })?;
        let end = reader.buffer_position() as usize;
        let line = lines.line(begin);
        match event {
            Event::Start(start) => {
                if root.is_some() {
                    return Err(XmlError {
                        line,
                        message: "content after the root element".into(),
                    });
                }
                stack.push(open(&start, line, begin, &lines)?);
            }
            Event::Empty(start) => {
                let mut el = open(&start, line, begin, &lines)?;
                el.span = begin..end;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None if root.is_none() => root = Some(el),
                    None => {
                        return Err(XmlError {
                            line,
                            message: "content after the root element".into(),
                        })
                    }
                }
            }
            Event::End(_) => {
                let mut el = stack.pop().ok_or_else(|| XmlError {
                    line,
                    message: "unexpected closing tag".into(),
                })?;
                el.span.end = end;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Element(el)),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let text = t
                    .unescape()
                    .map_err(|e| XmlError {
                        line,
                        message: e.to_string(),
                    })?
                    .into_owned();
                match stack.last_mut() {
                    Some(parent) => parent.children.push(Node::Text(text)),
                    None if text.trim().is_empty() => {}
                    None => {
                        return Err(XmlError {
                            line,
                            message: "text outside the root element".into(),
                        })
                    }
                }
            }
            Event::CData(c) => {
                let text = String::from_utf8(c.into_inner().into_owned()).map_err(|e| XmlError {
                    line,
                    message: e.to_string(),
                })?;
                if let Some(parent) = stack.last_mut() {
                    parent.children.push(Node::Text(text));
                }
            }
            Event::Eof => {
                if let Some(open) = stack.last() {
                    return Err(XmlError {
                        line: lines.line(bytes.len()),
                        message: format!("unclosed element <{}> opened on line {}", open.name, open.line),
                    });
                }
                return root.ok_or(XmlError {
                    line: 1,
                    message: "no root element".into(),
                });
            }
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
        }
    }
}
