mod common;

use std::collections::BTreeMap;

use decode_core::synth;
use decode_core::transform::{add_two_turns, balanced_sample, remove_contradicting_turns, turn_pairs};
use decode_core::{detect_structured, DetectorConfig, Label, LabeledExample, MockScorer, Split, Validation};
use proptest::prelude::*;

fn is_subsequence(needle: &[&str], hay: &[&str]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn texts(ex: &LabeledExample) -> Vec<&str> {
    ex.dialogue.utterances().iter().map(|u| u.text.as_str()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn a2t_preserves_everything_but_length(seed in any::<u64>(), insert_seed in any::<u64>()) {
        let corpus = synth::generate(20, 1.0, seed).unwrap();
        let pool = turn_pairs(corpus.examples.iter().map(|e| &e.dialogue));
        for ex in &corpus.examples {
            let out = match add_two_turns(ex, &pool, insert_seed) {
                Ok(o) => o,
                Err(decode_core::transform::TransformError::EvidenceAdjacentToTail { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            prop_assert_eq!(out.dialogue.len(), ex.dialogue.len() + 2);
            prop_assert_eq!(out.label, Label::Contradiction);
            prop_assert_eq!(&out.evidence, &ex.evidence);
            prop_assert!(is_subsequence(&texts(ex), &texts(&out)));
            prop_assert!(out.validate(Validation::Strict).is_ok());
            let n = out.dialogue.last_index();
            prop_assert_eq!(out.dialogue.utterances()[n - 1].text.as_str(), texts(ex)[ex.dialogue.last_index() - 1]);
        }
    }

    #[test]
    fn rct_removes_the_signal(seed in any::<u64>()) {
        let corpus = synth::generate(20, 1.0, seed).unwrap();
        let oracle = MockScorer::from_table(corpus.oracle.clone());
        for ex in &corpus.examples {
            let out = remove_contradicting_turns(ex).unwrap();
            let kept = texts(&out);
            for &e in &ex.evidence {
                let gone = ex.dialogue.utterances()[e].text.as_str();
                prop_assert!(!kept.contains(&gone));
            }
            let original = texts(ex);
            prop_assert_eq!(kept.last(), original.last());
            prop_assert_eq!(out.label, Label::NonContradiction);
            prop_assert!(out.evidence.is_empty());
            prop_assert_eq!(out.split, Some(Split::Rct));
            let det = detect_structured(&out.dialogue, &oracle, &DetectorConfig::default()).unwrap();
            prop_assert_eq!(det.label, Label::NonContradiction);
            prop_assert!(det.score < 0.5);
        }
    }

    #[test]
    fn balanced_sample_preserves_length_multiset(seed in any::<u64>()) {
        let positives = synth::generate(30, 1.0, seed).unwrap().examples;
        let negatives = synth::generate(120, 0.0, seed ^ 1).unwrap().examples;
        let pool: Vec<_> = negatives.iter().map(|e| e.dialogue.clone()).collect();
        let histogram = |xs: &[LabeledExample]| {
            let mut m = BTreeMap::new();
            for x in xs {
                *m.entry(x.dialogue.len()).or_insert(0usize) += 1;
            }
            m
        };
        match balanced_sample(&positives, &pool, seed) {
            Ok(out) => {
                prop_assert_eq!(histogram(&out), histogram(&positives));
                prop_assert!(out.iter().all(|e| e.label == Label::NonContradiction));
            }
            Err(decode_core::transform::TransformError::ShortPool { length, needed, available }) => {
                let have = pool.iter().filter(|d| d.len() == length).count();
                prop_assert_eq!(have, available);
                prop_assert!(needed > available);
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn a2t_draws_from_other_dialogues() {
    let corpus = synth::generate(10, 1.0, 4).unwrap();
    let pool = turn_pairs(corpus.examples.iter().map(|e| &e.dialogue));
    for ex in &corpus.examples {
        if let Ok(out) = add_two_turns(ex, &pool, 1) {
            let n = out.dialogue.last_index();
            let inserted = (&out.dialogue.utterances()[n - 3].text, &out.dialogue.utterances()[n - 2].text);
            assert!(pool
                .iter()
                .filter(|p| (&p.first, &p.second) == inserted)
                .any(|p| p.source_id.as_deref() != Some(ex.dialogue.id())));
        }
    }
}
