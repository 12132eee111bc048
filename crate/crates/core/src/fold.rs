//! Case and diacritic folding shared by search, party matching and name resolution.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Lowercases and folds German umlauts (`ä` → `ae`, `ß` → `ss`); any other
/// diacritic is dropped (`é` → `e`).
pub fn german_fold(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars().flat_map(char::to_lowercase) {
        match c {
            'ä' => out.push_str("ae"),
            'ö' => out.push_str("oe"),
            'ü' => out.push_str("ue"),
            'ß' => out.push_str("ss"),
            c if c.is_ascii() => out.push(c),
            c => out.extend(c.to_string().nfd().filter(|m| !is_combining_mark(*m))),
        }
    }
    out
}

/// Folded lookup key: [`german_fold`], punctuation turned into spaces,
/// whitespace collapsed and trimmed. `"CDU/CSU"` and `"cdu csu"` share a key.
pub fn fold_key(s: &str) -> String {
    let folded: String = german_fold(s)
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();
    folded.split_whitespace().collect::<Vec<_>>().join(" ")
}
