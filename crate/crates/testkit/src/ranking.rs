//! BM25 recomputed from raw token counts over the whole corpus.

use std::collections::HashMap;

use plenum_core::model::SpeechContribution;

use crate::tokens;

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;

/// Scores of the documents in `ids`, summed over `terms` (already folded).
pub fn bm25(corpus: &[SpeechContribution], ids: &[String], terms: &[String]) -> HashMap<String, f64> {
    let docs: Vec<(&str, Vec<String>)> = corpus.iter().map(|r| (r.id.as_str(), tokens(&r.text))).collect();
    let n = docs.len() as f64;
    let avgdl = docs.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / n;
    let mut out = HashMap::new();
    for id in ids {
        let (_, toks) = docs.iter().find(|(d, _)| d == id).expect("id in corpus");
        let dl = toks.len() as f64;
        let mut score = 0.0;
        for term in terms {
            let df = docs.iter().filter(|(_, t)| t.contains(term)).count() as f64;
            let tf = toks.iter().filter(|t| *t == term).count() as f64;
            if df == 0.0 || tf == 0.0 {
                continue;
            }
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf * (K1 + 1.0) / (tf + K1 * (1.0 - B + B * dl / avgdl));
        }
        out.insert(id.clone(), score);
    }
    out
}
