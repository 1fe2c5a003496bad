use std::path::Path;

use transeg::alignment::SentenceAlignment;
use transeg::model::TranslationData;
use transeg::trans_repr::{load_embeddings, pool, write_embeddings, ClsStrategy, TransReprError};

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)).unwrap()
}

#[test]
fn loads_valid_file() {
    let t = load_embeddings(&fixture("transemb_valid.jsonl")).unwrap();
    assert_eq!(t.len(), 3);
    assert_eq!(t["s0"].words.len(), 3);
    assert_eq!(t["s1"].cls, [1e-3, -250.0, 0.125]);
    assert!(t["s2"].words.is_empty());
    assert!(t.values().all(|e| e.dim == 3));
}

#[test]
fn rejects_bad_files() {
    assert!(matches!(
        load_embeddings(&fixture("transemb_dim_mismatch.jsonl")),
        Err(TransReprError::DimMismatch { expected: 3, found: 2, .. })
    ));
    assert!(matches!(load_embeddings(&fixture("transemb_duplicate.jsonl")), Err(TransReprError::DuplicateSentenceId(id)) if id == "s0"));
    assert!(matches!(load_embeddings(&fixture("transemb_malformed.jsonl")), Err(TransReprError::Parse { line: 2, .. })));
}

#[test]
fn write_then_load_is_identity() {
    let t = load_embeddings(&fixture("transemb_valid.jsonl")).unwrap();
    let mut records: Vec<_> = t.values().cloned().collect();
    records.sort_by(|a, b| a.sentence_id.cmp(&b.sentence_id));
    let back = load_embeddings(&write_embeddings(&records)).unwrap();
    assert_eq!(back, t);
}

#[test]
fn pooling_from_fixture() {
    let t = load_embeddings(&fixture("transemb_valid.jsonl")).unwrap();
    let p = pool(&t["s0"], &[0, 2], ClsStrategy::None).unwrap();
    assert_eq!(p.primary, [0.5, 0.0, 0.5]);
    let p = pool(&t["s0"], &[1], ClsStrategy::Avg).unwrap();
    assert_eq!(p.primary, [0.25, -0.125, 1.0]);
    let p = pool(&t["s2"], &[], ClsStrategy::None).unwrap();
    assert_eq!(p.primary, [0.0, 0.0, 0.0]);

    let data = TranslationData::new(t, [SentenceAlignment::new("s0", [(4, 1)])]);
    let p = data.pooled("s0", 4, ClsStrategy::Concat).unwrap();
    assert_eq!(p.primary, [0.0, 1.0, 0.0]);
    assert_eq!(p.cls.unwrap(), [0.5, -1.25, 2.0]);
    assert!(data.pooled("s1", 0, ClsStrategy::None).is_err());
    assert_eq!(data.pooled("s1", 0, ClsStrategy::Only).unwrap().primary, [1e-3, -250.0, 0.125]);
}
