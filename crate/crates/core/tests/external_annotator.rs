use std::path::Path;
use std::sync::Arc;

use plenum_core::annotate::{
    annotate_records, AnnotateError, AnnotationConfig, Annotator, AnnotatorKind, AnnotatorOutput, ExternalAnnotator,
};
use plenum_core::model::SpanKind;
use plenum_testkit::corpus::CorpusGen;

const NER: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    text = req["text"]
    spans, at = [], text.find("Merkel")
    while at >= 0:
        spans.append({"start": at, "end": at + 6, "label": "PER"})
        at = text.find("Merkel", at + 1)
    print(json.dumps({"id": req["id"], "spans": spans}))
"#;

const TOPIC: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    label = "Energy" if "Kohle" in req["text"] else "Education"
    print(json.dumps({"id": req["id"], "label": label, "confidence": 0.5}))
"#;

const BROKEN: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    print(json.dumps({"id": req["id"], "spans": [{"start": 0, "end": 100000, "label": "PER"}]}))
"#;

fn script(dir: &Path, name: &str, body: &str) -> Vec<String> {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    vec![path.display().to_string()]
}

fn python_available() -> bool {
    std::process::Command::new("python3")
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

#[test]
fn external_processes_annotate_in_parallel_chunks() {
    if !python_available() {
        eprintln!("python3 not found; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let ner = ExternalAnnotator::new(
        "ner-py",
        AnnotatorKind::Ner,
        "python3",
        script(dir.path(), "ner.py", NER),
    );
    let topic = ExternalAnnotator::new(
        "topic-py",
        AnnotatorKind::Topic,
        "python3",
        script(dir.path(), "topic.py", TOPIC),
    );
    let records = CorpusGen::new(4).corpus(40);

    let outputs = ner.annotate_batch(&records, 3);
    assert_eq!(outputs.len(), records.len());
    for (r, out) in records.iter().zip(&outputs) {
        let Ok(AnnotatorOutput::Spans(spans)) = out else {
            panic!("{out:?}")
        };
        assert_eq!(spans.len(), r.text.matches("Merkel").count());
        for s in spans {
            assert_eq!(r.slice(s.start, s.end), "Merkel");
        }
    }

    let mut config = AnnotationConfig::default();
    config.registry.register(Arc::new(ner));
    config.registry.register(Arc::new(topic));
    config.ner = vec!["ner-py".into()];
    config.topic = Some("topic-py".into());
    let (annotated, failures) = annotate_records(records, &config).unwrap();
    assert!(failures.is_empty(), "{failures:?}");
    for r in &annotated {
        let topic = r.topic.as_ref().unwrap();
        if r.role == plenum_core::model::Role::President {
            assert_eq!(topic.label, "PresidencyAction");
        } else {
            assert_eq!(
                topic.label,
                if r.text.contains("Kohle") {
                    "Energy"
                } else {
                    "Education"
                }
            );
        }
        assert!(r
            .annotations
            .iter()
            .filter(|a| a.kind == SpanKind::NerEntity)
            .all(|a| a.annotator == "ner-py"));
    }
}

#[test]
fn invalid_output_is_reported_per_record() {
    if !python_available() {
        eprintln!("python3 not found; skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let broken = ExternalAnnotator::new(
        "ner-bad",
        AnnotatorKind::Ner,
        "python3",
        script(dir.path(), "bad.py", BROKEN),
    );
    let records = CorpusGen::new(5).corpus(3);
    let err = broken.annotate(&records[0]).unwrap_err();
    assert!(
        matches!(err, AnnotateError::AnnotatorFailure { ref annotator, .. } if annotator == "ner-bad"),
        "{err}"
    );

    let missing = ExternalAnnotator::new("ner-missing", AnnotatorKind::Ner, "/nonexistent/annotator", vec![]);
    assert!(missing.annotate(&records[0]).is_err());
}
