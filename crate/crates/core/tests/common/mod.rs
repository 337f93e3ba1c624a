#![allow(dead_code)]

use std::collections::BTreeSet;

use decode_core::scorer::{ScoreRequest, Scorer};
use decode_core::{Dialogue, MockScorer, Utterance, Validation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Alternating A/B dialogue with the given texts.
pub fn ab(id: &str, texts: &[&str]) -> Dialogue {
    let utts = texts
        .iter()
        .enumerate()
        .map(|(i, t)| Utterance::new(if i % 2 == 0 { "A" } else { "B" }, *t))
        .collect();
    Dialogue::new(id, utts).unwrap()
}

/// Random dialogue of 2..=max_len utterances with unique texts. Speakers may
/// repeat back to back; both always occur.
pub fn random_dialogue(rng: &mut ChaCha8Rng, max_len: usize, id: &str) -> Dialogue {
    loop {
        let len = rng.random_range(2..=max_len);
        let utts: Vec<Utterance> = (0..len)
            .map(|i| {
                let speaker = if rng.random_bool(0.5) { "A" } else { "B" };
                Utterance::new(speaker, format!("{id} line {i} {}", rng.random::<u32>()))
            })
            .collect();
        if let Ok(d) = Dialogue::with_validation(id, utts, Validation::Lenient) {
            return d;
        }
    }
}

/// Mock scorer with an independent random probability for every ordered
/// utterance pair of `d`.
pub fn random_mock(rng: &mut ChaCha8Rng, d: &Dialogue) -> MockScorer {
    let mut s = MockScorer::new(rng.random_range(0.0..1.0));
    let utts = d.utterances();
    for a in utts {
        for b in utts {
            // Coarse grid so ties and threshold hits actually happen.
            let p = f64::from(rng.random_range(0..=20u32)) / 20.0;
            s.insert(&a.text, &b.text, p);
        }
    }
    s
}

/// Structured detection by hand: one scorer call per same-speaker pair.
pub fn brute_force_structured(d: &Dialogue, scorer: &dyn Scorer, eta_e: f64) -> (f64, BTreeSet<usize>) {
    let utts = d.utterances();
    let n = utts.len() - 1;
    let mut best = 0.0_f64;
    let mut evidence = BTreeSet::new();
    for i in 0..n {
        if utts[i].speaker != utts[n].speaker {
            continue;
        }
        let p = scorer
            .score_batch(&[ScoreRequest::new(utts[i].text.clone(), utts[n].text.clone())])
            .unwrap()[0];
        if p > best {
            best = p;
        }
        if p > eta_e {
            evidence.insert(i);
        }
    }
    (best, evidence)
}

/// O(n^2) Mann-Whitney pair count.
pub fn auc_pair_count(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (sp, _) in scores.iter().zip(labels).filter(|(_, &l)| l) {
        for (sn, _) in scores.iter().zip(labels).filter(|(_, &l)| !l) {
            pairs += 1.0;
            if sp > sn {
                wins += 1.0;
            } else if sp == sn {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}
