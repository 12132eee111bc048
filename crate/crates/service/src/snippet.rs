use std::collections::HashSet;

use plenum_core::index::analyze_with_offsets;
use plenum_core::model::slice_chars;
use serde::{Deserialize, Serialize};

/// An excerpt of a record's text. All offsets are code points into the full
/// record text, so they can be used directly on the detail view.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snippet {
    pub start: usize,
    pub end: usize,
    pub text: String,
    pub highlights: Vec<[usize; 2]>,
}

/// Window of about `width` characters around the first occurrence of any
/// of `terms` (already analyzed), or the start of the text.
pub fn snippet(text: &str, terms: &[String], width: usize) -> Snippet {
    let wanted: HashSet<&str> = terms.iter().map(String::as_str).collect();
    let tokens = analyze_with_offsets(text);
    let hits: Vec<(usize, usize)> = tokens
        .iter()
        .filter(|(t, _, _)| wanted.contains(t.as_str()))
        .map(|&(_, s, e)| (s, e))
        .collect();
    let len = text.chars().count();
    let lead = width / 4;
    let mut start = hits.first().map_or(0, |&(s, _)| s.saturating_sub(lead));
    // Begin at a word start when one is close.
    if start > 0 {
        if let Some(&(_, s, _)) = tokens.iter().find(|(_, s, _)| *s >= start) {
            start = s;
        }
    }
    let end = (start + width).min(len);
    Snippet {
        start,
        end,
        text: slice_chars(text, start, end),
        highlights: hits
            .into_iter()
            .filter(|&(s, e)| s >= start && e <= end)
            .map(|(s, e)| [s, e])
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn highlights_use_absolute_code_points() {
        let text = "Übermäßig viel Vorrede. Der Klimawandel ist da. Klimawandel!";
        let s = snippet(text, &["klimawandel".into()], 30);
        for [a, b] in &s.highlights {
            assert_eq!(slice_chars(text, *a, *b), "Klimawandel");
        }
        assert_eq!(s.highlights[0], [28, 39]);
        assert_eq!(s.text, slice_chars(text, s.start, s.end));
        assert!(s.start <= 28 && s.end - s.start <= 30);
    }

    #[test]
    fn no_terms_gives_the_opening() {
        let s = snippet("Guten Morgen.", &[], 5);
        assert_eq!((s.start, s.end, s.text.as_str()), (0, 5, "Guten"));
        assert!(s.highlights.is_empty());
    }

    #[test]
    fn folded_terms_match_umlaut_text() {
        let s = snippet("Die Bürger zahlen.", &["buerger".into()], 100);
        assert_eq!(s.highlights, [[4, 10]]);
    }
}
