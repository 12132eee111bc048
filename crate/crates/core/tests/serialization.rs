use plenum_core::jsonl::{read_records, write_records};
use plenum_core::model::SpeechContribution;
use plenum_testkit::corpus::CorpusGen;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_roundtrip_is_identity(seed in any::<u64>(), n in 0usize..20) {
        let records = CorpusGen::new(seed).corpus(n);
        let mut buf = Vec::new();
        write_records(&mut buf, &records).unwrap();
        prop_assert_eq!(buf.iter().filter(|&&b| b == b'\n').count(), n);
        let back = read_records(buf.as_slice(), "mem").unwrap();
        prop_assert_eq!(&back, &records);
        let mut again = Vec::new();
        write_records(&mut again, &back).unwrap();
        prop_assert_eq!(again, buf);
    }

    #[test]
    fn single_record_json_roundtrip(seed in any::<u64>()) {
        let r = CorpusGen::new(seed).record();
        let json = serde_json::to_string(&r).unwrap();
        let back: SpeechContribution = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, r);
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let r = CorpusGen::new(1).record();
    let mut v = serde_json::to_value(&r).unwrap();
    v["colour"] = "blue".into();
    let line = format!("{v}\n");
    let err = read_records(line.as_bytes(), "mem").unwrap_err();
    assert!(err.to_string().contains("mem:1"), "{err}");
}
