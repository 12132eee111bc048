//! Test support: synthetic corpora, fixture paths and brute-force oracles
//! that re-derive expected results without the production data structures.

pub mod corpus;
pub mod cto_suite;
pub mod fixtures;
pub mod json_schema;
pub mod names;
pub mod ranking;
pub mod search_oracle;
pub mod xmltext;

use std::path::PathBuf;

/// The repository's `fixtures/` directory.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures_dir().join(rel)
}

/// Lowercase, German umlaut folding and removal of other diacritics.
pub fn fold(s: &str) -> String {
    use unicode_normalization::UnicodeNormalization;
    let mut out = String::with_capacity(s.len());
    for c in s.chars().flat_map(char::to_lowercase) {
        match c {
            'ä' => out.push_str("ae"),
            'ö' => out.push_str("oe"),
            'ü' => out.push_str("ue"),
            'ß' => out.push_str("ss"),
            c => out.extend(
                std::iter::once(c)
                    .nfd()
                    .filter(|c| !unicode_normalization::char::is_combining_mark(*c)),
            ),
        }
    }
    out
}

/// Folded Unicode words.
pub fn tokens(s: &str) -> Vec<String> {
    use unicode_segmentation::UnicodeSegmentation;
    s.unicode_words().map(fold).collect()
}
