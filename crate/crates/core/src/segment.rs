//! Rule-based sentence segmentation.
//!
//! A run of terminators (`. ! ? :`, plus trailing quotes or brackets) ends a
//! sentence when it is followed by whitespace or the end of the text, unless
//!
//! * the `.` closes an entry of the abbreviation lexicon,
//! * the `.` sits between two digits, or
//! * the terminator lies inside a balanced pair of parentheses or inside
//!   German quotation marks („…“, »…«).
//!
//! A sentence that starts with `(` also ends at the matching `)`, so a
//! standalone interjection forms its own sentence.

use std::sync::OnceLock;

use crate::model::Sentence;

const TERMINATORS: [char; 4] = ['.', '!', '?', ':'];
const CLOSERS: [char; 8] = ['"', '\'', '”', '“', '«', '»', ')', ']'];
/// Quotation pairs whose content never ends a sentence.
const QUOTES: [(char, char); 2] = [('„', '“'), ('»', '«')];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbbreviationLexicon {
    entries: Vec<Vec<char>>,
}

impl AbbreviationLexicon {
    pub const DEFAULT_SOURCE: &'static str = include_str!("../config/abbreviations.txt");

    /// One abbreviation per line; blank lines and `#` comments are skipped.
    /// A space inside an entry matches any single whitespace character.
    /// Entries without a `.` are ignored since they can never shadow a terminator.
    pub fn parse(source: &str) -> Self {
        let entries = source
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#') && l.contains('.'))
            .map(|l| l.chars().collect())
            .collect();
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when the `.` at `pos` belongs to an abbreviation occurrence.
    fn covers(&self, chars: &[char], pos: usize) -> bool {
        self.entries.iter().any(|abbr| {
            abbr.iter().enumerate().filter(|(_, &c)| c == '.').any(|(k, _)| {
                if pos < k {
                    return false;
                }
                let start = pos - k;
                let end = start + abbr.len();
                end <= chars.len()
                    && chars[start..end]
                        .iter()
                        .zip(abbr)
                        .all(|(&c, &a)| c == a || (a == ' ' && c.is_whitespace()))
                    && (start == 0 || !chars[start - 1].is_alphanumeric())
            })
        })
    }
}

impl Default for AbbreviationLexicon {
    fn default() -> Self {
        Self::parse(Self::DEFAULT_SOURCE)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Segmenter {
    lexicon: AbbreviationLexicon,
}

impl Segmenter {
    pub fn new(lexicon: AbbreviationLexicon) -> Self {
        Self { lexicon }
    }

    pub fn segment(&self, text: &str) -> Vec<Sentence> {
        let chars: Vec<char> = text.chars().collect();
        let n = chars.len();
        // closing[i] = index of the matching ')' for a '(' at i.
        let mut closing = vec![usize::MAX; n];
        let mut depth = vec![0u32; n];
        let mut stack = Vec::new();
        for (i, &c) in chars.iter().enumerate() {
            match c {
                '(' => stack.push(i),
                ')' => {
                    if let Some(open) = stack.pop() {
                        closing[open] = i;
                    }
                }
                _ => {}
            }
        }
        let mut protected: Vec<(usize, usize)> = closing
            .iter()
            .enumerate()
            .filter(|(_, &close)| close != usize::MAX)
            .map(|(open, &close)| (open, close))
            .collect();
        for (open_q, close_q) in QUOTES {
            let mut open_at = None;
            for (i, &c) in chars.iter().enumerate() {
                if c == close_q && open_at.is_some() {
                    protected.push((open_at.take().unwrap(), i));
                } else if c == open_q && open_at.is_none() {
                    open_at = Some(i);
                }
            }
        }
        for (open, close) in protected {
            for d in &mut depth[open + 1..close] {
                *d += 1;
            }
        }

        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        let mut paren_end: Option<usize> = None;
        let mut i = 0;
        while i < n {
            let c = chars[i];
            if start.is_none() {
                if c.is_whitespace() {
                    i += 1;
                    continue;
                }
                start = Some(i);
                paren_end = (c == '(' && closing[i] != usize::MAX).then_some(closing[i]);
            }
            let ends =
                paren_end == Some(i) || (TERMINATORS.contains(&c) && depth[i] == 0 && !self.is_exception(&chars, i));
            let boundary = ends.then(|| self.cluster_end(&chars, i + 1));
            match boundary {
                Some(end) if end == n || chars[end].is_whitespace() => {
                    out.push(Sentence {
                        index: out.len(),
                        start: start.take().unwrap(),
                        end,
                    });
                    paren_end = None;
                    i = end;
                }
                _ => i += 1,
            }
        }
        if let Some(s) = start {
            let end = chars.iter().rposition(|c| !c.is_whitespace()).map_or(s, |p| p + 1);
            if end > s {
                out.push(Sentence {
                    index: out.len(),
                    start: s,
                    end,
                });
            }
        }
        out
    }

    /// Extends a terminator run over further terminators and closing marks.
    fn cluster_end(&self, chars: &[char], mut j: usize) -> usize {
        while j < chars.len() && (TERMINATORS.contains(&chars[j]) || CLOSERS.contains(&chars[j])) {
            j += 1;
        }
        j
    }

    fn is_exception(&self, chars: &[char], i: usize) -> bool {
        if chars[i] != '.' {
            return false;
        }
        let digit_before = i > 0 && chars[i - 1].is_ascii_digit();
        let digit_after = chars.get(i + 1).is_some_and(|c| c.is_ascii_digit());
        (digit_before && digit_after) || self.lexicon.covers(chars, i)
    }
}

/// Segments with the shipped abbreviation lexicon.
pub fn segment(text: &str) -> Vec<Sentence> {
    static DEFAULT: OnceLock<Segmenter> = OnceLock::new();
    DEFAULT.get_or_init(Segmenter::default).segment(text)
}
