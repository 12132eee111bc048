//! Speech text extraction from the raw fixtures using a separate XML parser.

/// Whitespace-separated words of all speech and stage text in a GermaParl file,
/// in document order. Speaker labels and the header are skipped.
pub fn germaparl_words(xml: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(xml).expect("fixture parses");
    let body = doc
        .descendants()
        .find(|n| n.has_tag_name(("http://www.tei-c.org/ns/1.0", "body")) || n.tag_name().name() == "body")
        .expect("fixture has a body");
    let mut out = Vec::new();
    for n in body.descendants().filter(|n| n.is_text()) {
        if n.ancestors().any(|a| a.tag_name().name() == "speaker") {
            continue;
        }
        out.extend(n.text().unwrap_or_default().split_whitespace().map(str::to_string));
    }
    out
}

/// Words of all paragraphs and comments in a Bundestag file, in document
/// order, skipping speaker labels, presiding-officer labels and agenda titles.
pub fn bundestag_words(xml: &str) -> Vec<String> {
    let doc = roxmltree::Document::parse(xml).expect("fixture parses");
    let course = doc
        .descendants()
        .find(|n| n.tag_name().name() == "sitzungsverlauf")
        .expect("fixture has sitzungsverlauf");
    let mut out = Vec::new();
    for n in course.descendants().filter(|n| n.is_text()) {
        let skipped = n.ancestors().any(|a| {
            let name = a.tag_name().name();
            let klasse = a.attribute("klasse").unwrap_or("");
            name == "name" || (name == "p" && (klasse == "redner" || klasse.starts_with('T')))
        });
        if !skipped {
            out.extend(n.text().unwrap_or_default().split_whitespace().map(str::to_string));
        }
    }
    out
}
