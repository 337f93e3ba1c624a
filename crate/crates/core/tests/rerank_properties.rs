mod common;

use decode_core::rerank::{contradiction_rate, extend_history, rerank, score_hypotheses};
use decode_core::scorer::{FnScorer, ScoreRequest};
use decode_core::{detect_structured, synth, DetectorConfig, Dialogue, MockScorer};
use proptest::prelude::*;
use rand::Rng;

use common::rng;

/// History ending with the human, and a random mock over (bot line, hypothesis).
fn random_case(seed: u64) -> (Dialogue, Vec<String>, MockScorer) {
    let mut r = rng(seed);
    let turns = r.random_range(1..6) * 2 + 1;
    let utts = (0..turns)
        .map(|i| {
            let speaker = if i % 2 == 0 { "human" } else { "bot" };
            decode_core::Utterance::new(speaker, format!("{speaker} says {i} ({seed})"))
        })
        .collect();
    let history = Dialogue::new(format!("h{seed}"), utts).unwrap();
    let k = r.random_range(1..12);
    let hyps: Vec<String> = (0..k).map(|i| format!("candidate {i}")).collect();
    let mut scorer = MockScorer::new(0.0);
    for u in history.utterances().iter().filter(|u| u.speaker == "bot") {
        for h in &hyps {
            let p = f64::from(r.random_range(0..=10u32)) / 10.0;
            scorer.insert(&u.text, h, p);
        }
    }
    (history, hyps, scorer)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn rerank_is_a_sorted_permutation(seed in any::<u64>()) {
        let (history, hyps, scorer) = random_case(seed);
        let cfg = DetectorConfig::default();
        let out = rerank(&history, &hyps, &scorer, &cfg).unwrap();
        let mut ranks: Vec<usize> = out.iter().map(|r| r.original_rank).collect();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (0..hyps.len()).collect::<Vec<_>>());
        for r in &out {
            prop_assert_eq!(&r.text, &hyps[r.original_rank]);
            let d = detect_structured(&extend_history(&history, "bot", &r.text), &scorer, &cfg).unwrap();
            prop_assert_eq!(r.score, d.score);
        }
        let min = out.iter().map(|r| r.score).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(out[0].score, min);
        for w in out.windows(2) {
            prop_assert!(w[0].score < w[1].score || (w[0].score == w[1].score && w[0].original_rank < w[1].original_rank));
        }
    }

    #[test]
    fn reranked_top_one_contradicts_no_more(seeds in proptest::collection::vec(any::<u64>(), 1..8)) {
        let cfg = DetectorConfig::default();
        let mut before = Vec::new();
        let mut after = Vec::new();
        let mut any_quiet = false;
        let mut merged = MockScorer::new(0.0);
        for &seed in &seeds {
            let (history, hyps, scorer) = random_case(seed);
            let scores = score_hypotheses(&history, &hyps, &scorer, &cfg).unwrap();
            any_quiet |= scores.iter().any(|&s| s <= cfg.tau());
            let top = rerank(&history, &hyps, &scorer, &cfg).unwrap().remove(0);
            for u in history.utterances().iter().filter(|u| u.speaker == "bot") {
                for h in &hyps {
                    merged.insert(&u.text, h, scorer.lookup(&u.text, h));
                }
            }
            before.push((history.clone(), hyps[0].clone()));
            after.push((history, top.text));
        }
        let rate_before = contradiction_rate(&before, &merged, &cfg).unwrap();
        let rate_after = contradiction_rate(&after, &merged, &cfg).unwrap();
        prop_assert!(rate_after <= rate_before);
        if any_quiet {
            prop_assert!(rate_after < 1.0);
        }
    }

    #[test]
    fn constant_scorer_keeps_order(seed in any::<u64>(), c in 0.0f64..=1.0) {
        let (history, hyps, _) = random_case(seed);
        let constant = FnScorer(move |_: &ScoreRequest| c);
        let out = rerank(&history, &hyps, &constant, &DetectorConfig::default()).unwrap();
        prop_assert_eq!(out.iter().map(|r| r.original_rank).collect::<Vec<_>>(), (0..hyps.len()).collect::<Vec<_>>());
    }
}

#[test]
fn contradiction_rate_on_planted_corpus_is_planted_fraction() {
    let corpus = synth::generate(120, 0.3, 17).unwrap();
    let oracle = MockScorer::from_table(corpus.oracle.clone());
    let pairs: Vec<(Dialogue, String)> = corpus
        .examples
        .iter()
        .map(|ex| {
            let n = ex.dialogue.last_index();
            (ex.dialogue.prefix(n - 1), ex.dialogue.utterances()[n].text.clone())
        })
        .collect();
    let rate = contradiction_rate(&pairs, &oracle, &DetectorConfig::default()).unwrap();
    assert_eq!(rate, synth::planted_count(120, 0.3) as f64 / 120.0);
}
