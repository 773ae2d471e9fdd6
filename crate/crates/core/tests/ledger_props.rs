//! Changesets and revision chains on random models.

use std::fs;

use gemlogic::ledger::{replay, Reason, RecordMeta};
use gemlogic::{apply_changeset, diff, Ledger, MetabolicModel};
use gemlogic_testkit::{mutate_model, random_model, rng, ModelShape};
use proptest::prelude::*;

fn meta(i: usize) -> RecordMeta {
    RecordMeta {
        reason: Reason::Simulated,
        description: format!("step {i}"),
        author: "tests".into(),
        timestamp: format!("2024-01-01T00:{:02}:{:02}Z", i / 60 % 60, i % 60),
    }
}

/// `len` successive random edits of a random model, skipping no-op edits.
fn random_walk(seed: u64, len: usize) -> Vec<MetabolicModel> {
    let mut r = rng(seed);
    let mut states = vec![random_model(&mut r, ModelShape::default())];
    while states.len() <= len {
        let next = mutate_model(&mut r, states.last().unwrap());
        if &next != states.last().unwrap() {
            states.push(next);
        }
    }
    states
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn diff_then_apply_reproduces_the_target(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_model(&mut r, ModelShape::default());
        let b = mutate_model(&mut r, &a);
        let changes = diff(&a, &b);
        prop_assert_eq!(changes.is_empty(), a == b);
        prop_assert_eq!(&apply_changeset(&a, &changes).unwrap(), &b);
        // Every change serializes and survives a JSON round trip.
        let json = serde_json::to_string(&changes).unwrap();
        let back: Vec<gemlogic::ChangeItem> = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back, changes);
    }

    #[test]
    fn building_from_empty_reproduces_the_model(seed in any::<u64>()) {
        let m = random_model(&mut rng(seed), ModelShape::default());
        let empty = MetabolicModel::empty(&m.model_id);
        prop_assert_eq!(apply_changeset(&empty, &diff(&empty, &m)).unwrap(), m);
    }
}

#[test]
fn long_chain_replays_to_the_independent_target() {
    let states = random_walk(2024, 1000);
    let mut ledger = Ledger::in_memory();
    let mut head = ledger.record_model(None, &states[0], meta(0)).unwrap().id;
    for (i, s) in states.iter().enumerate().skip(1) {
        head = ledger.record_model(Some(&head), s, meta(i)).unwrap().id;
    }
    assert_eq!(ledger.len(), 1001);
    let chain = ledger.lineage(&head).unwrap();
    let replayed = replay(&MetabolicModel::empty(&states[0].model_id), &chain).unwrap();
    assert_eq!(&replayed, states.last().unwrap());
    // Intermediate states are reachable too.
    assert_eq!(ledger.model_at(&chain[500].id).unwrap(), states[500]);
}

#[test]
fn persisted_ledger_reloads_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let states = random_walk(7, 60);
    let written = {
        let mut ledger = Ledger::open(dir.path()).unwrap();
        let mut head = ledger.record_model(None, &states[0], meta(0)).unwrap().id;
        for (i, s) in states.iter().enumerate().skip(1) {
            head = ledger.record_model(Some(&head), s, meta(i)).unwrap().id;
        }
        ledger.export_jsonl()
    };
    let on_disk = fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(on_disk, written);
    let index = fs::read(dir.path().join("index.json")).unwrap();

    let reopened = Ledger::open(dir.path()).unwrap();
    assert_eq!(reopened.export_jsonl(), written);
    assert_eq!(fs::read(dir.path().join("index.json")).unwrap(), index);
    let head = reopened.head(&states[0].model_id).unwrap().to_string();
    assert_eq!(&reopened.model_at(&head).unwrap(), states.last().unwrap());
}

#[test]
fn tampered_records_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let states = random_walk(3, 3);
    {
        let mut ledger = Ledger::open(dir.path()).unwrap();
        let mut head = ledger.record_model(None, &states[0], meta(0)).unwrap().id;
        for (i, s) in states.iter().enumerate().skip(1) {
            head = ledger.record_model(Some(&head), s, meta(i)).unwrap().id;
        }
    }
    let path = dir.path().join("records.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let tampered = text.replacen("\"ADD\"", "\"REMOVE\"", 1);
    assert_ne!(tampered, text);
    fs::write(&path, tampered).unwrap();
    assert!(Ledger::open(dir.path()).is_err());
}

#[test]
fn identical_revisions_are_deduplicated() {
    let states = random_walk(5, 1);
    let mut ledger = Ledger::in_memory();
    let a = ledger.record_model(None, &states[0], meta(0)).unwrap();
    let b = ledger.record_model(None, &states[0], meta(1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(ledger.len(), 1);
}

#[test]
fn serialized_changesets_are_stable() {
    let states = random_walk(7, 200);
    for w in states.windows(2) {
        for item in diff(&w[0], &w[1]) {
            let json = serde_json::to_string(&item).unwrap();
            let back: gemlogic::ChangeItem = serde_json::from_str(&json).unwrap();
            assert_eq!(back, item);
            assert_eq!(serde_json::to_string(&back).unwrap(), json);
        }
    }
}
