//! Checklist transformations of contradiction examples and balanced sampling.
//!
//! * **A2T** (add two turns) inserts a sampled turn pair between the evidence
//!   and the final utterance. The label stays `contradiction`.
//! * **RCT** (remove contradicting turns) deletes every turn pair holding an
//!   evidence utterance, keeping `u_n`. The label becomes
//!   `non_contradiction`.
//! * [`balanced_sample`] draws non-contradicting dialogues whose length
//!   multiset matches a set of contradictions.
//!
//! Turns are positional pairs `(2k, 2k + 1)`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dialogue::{
    Dialogue, Label, LabeledExample, Split, Utterance, Validation, ValidationError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("example {id} is not labeled contradiction")]
    NotContradiction { id: String },
    #[error("example {id} has no evidence indices")]
    NoEvidence { id: String },
    #[error("example {id}: evidence adjacent to tail (index {index}); cannot insert between")]
    EvidenceAdjacentToTail { id: String, index: usize },
    #[error("turn pair pool is empty")]
    EmptyPool,
    #[error("example {id}: degenerate RCT output with {remaining} utterance(s)")]
    DegenerateRct { id: String, remaining: usize },
    #[error("pool has {available} dialogue(s) of length {length}, need {needed} (short by {})", needed - available)]
    ShortPool {
        length: usize,
        needed: usize,
        available: usize,
    },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

/// Two consecutive utterance texts usable as an inserted turn. `source_id`
/// names the dialogue it came from so A2T never re-inserts from the example
/// being transformed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnPair {
    pub source_id: Option<String>,
    pub first: String,
    pub second: String,
}

impl TurnPair {
    pub fn new(first: impl Into<String>, second: impl Into<String>) -> Self {
        Self {
            source_id: None,
            first: first.into(),
            second: second.into(),
        }
    }
}

/// Every complete positional turn pair of every dialogue.
pub fn turn_pairs<'a>(dialogues: impl IntoIterator<Item = &'a Dialogue>) -> Vec<TurnPair> {
    dialogues
        .into_iter()
        .flat_map(|d| {
            d.utterances().chunks_exact(2).map(move |pair| TurnPair {
                source_id: Some(d.id().to_owned()),
                first: pair[0].text.clone(),
                second: pair[1].text.clone(),
            })
        })
        .collect()
}

/// Per-item seed for applying a seeded transform across a corpus.
pub fn item_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn require_contradiction(example: &LabeledExample) -> Result<(), TransformError> {
    let id = example.dialogue.id().to_owned();
    if !example.label.is_contradiction() {
        return Err(TransformError::NotContradiction { id });
    }
    if example.evidence.is_empty() {
        return Err(TransformError::NoEvidence { id });
    }
    Ok(())
}

/// A2T: inserts a pool turn pair at positions `(n-1, n)`, pushing the final
/// turn pair to `(n+1, n+2)`. Inserted utterances take the speakers of the
/// positions they occupy, so alternation is preserved.
pub fn add_two_turns(example: &LabeledExample, pool: &[TurnPair], seed: u64) -> Result<LabeledExample, TransformError> {
    require_contradiction(example)?;
    let dialogue = &example.dialogue;
    let n = dialogue.last_index();
    let id = dialogue.id();
    if let Some(&index) = example.evidence.iter().find(|&&i| i + 1 >= n) {
        return Err(TransformError::EvidenceAdjacentToTail {
            id: id.to_owned(),
            index,
        });
    }
    let candidates: Vec<&TurnPair> = pool
        .iter()
        .filter(|p| p.source_id.as_deref() != Some(id))
        .collect();
    if candidates.is_empty() {
        return Err(TransformError::EmptyPool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked = candidates[rng.random_range(0..candidates.len())];

    let utts = dialogue.utterances();
    let mut out = Vec::with_capacity(utts.len() + 2);
    out.extend_from_slice(&utts[..n - 1]);
    out.push(Utterance::new(utts[n - 1].speaker.clone(), picked.first.clone()));
    out.push(Utterance::new(utts[n].speaker.clone(), picked.second.clone()));
    out.extend_from_slice(&utts[n - 1..]);

    let mut result = example.clone();
    result.dialogue = Dialogue::with_validation(id, out, Validation::Lenient)?;
    result.split = Some(Split::A2t);
    Ok(result)
}

/// RCT: removes the turn pair of every evidence index. The final utterance
/// always survives: when evidence shares its turn pair only the evidence
/// utterance goes.
pub fn remove_contradicting_turns(example: &LabeledExample) -> Result<LabeledExample, TransformError> {
    require_contradiction(example)?;
    let dialogue = &example.dialogue;
    let n = dialogue.last_index();
    let mut removed = BTreeSet::new();
    for &e in &example.evidence {
        let start = e - e % 2;
        let turn = start..=(start + 1).min(n);
        if turn.contains(&n) {
            removed.insert(e);
        } else {
            removed.extend(turn);
        }
    }
    let kept: Vec<Utterance> = dialogue
        .utterances()
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed.contains(i))
        .map(|(_, u)| u.clone())
        .collect();
    if kept.len() < 2 {
        return Err(TransformError::DegenerateRct {
            id: dialogue.id().to_owned(),
            remaining: kept.len(),
        });
    }
    let mut result = example.clone();
    result.dialogue = Dialogue::with_validation(dialogue.id(), kept, Validation::Lenient)?;
    result.label = Label::NonContradiction;
    result.evidence.clear();
    result.split = Some(Split::Rct);
    Ok(result)
}

/// Samples one non-contradicting dialogue per contradiction, without
/// replacement, matching dialogue lengths exactly. Output `i` has the length
/// of `contradictions[i]` and inherits its `source` and `split`.
pub fn balanced_sample(
    contradictions: &[LabeledExample],
    pool: &[Dialogue],
    seed: u64,
) -> Result<Vec<LabeledExample>, TransformError> {
    let mut wanted: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, ex) in contradictions.iter().enumerate() {
        wanted.entry(ex.dialogue.len()).or_default().push(i);
    }
    let mut by_len: BTreeMap<usize, Vec<&Dialogue>> = BTreeMap::new();
    for d in pool {
        by_len.entry(d.len()).or_default().push(d);
    }
    for (&length, slots) in &wanted {
        let available = by_len.get(&length).map_or(0, Vec::len);
        if available < slots.len() {
            return Err(TransformError::ShortPool {
                length,
                needed: slots.len(),
                available,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assigned: Vec<Option<&Dialogue>> = vec![None; contradictions.len()];
    for (length, slots) in &wanted {
        let candidates = &by_len[length];
        let picks = index::sample(&mut rng, candidates.len(), slots.len());
        for (&slot, pick) in slots.iter().zip(picks.iter()) {
            assigned[slot] = Some(candidates[pick]);
        }
    }

    Ok(contradictions
        .iter()
        .zip(assigned)
        .map(|(src, d)| {
            let mut ex = LabeledExample::new(d.expect("every slot assigned").clone(), Label::NonContradiction, []);
            ex.source = src.source.clone();
            ex.split = src.split;
            ex
        })
        .collect())
}
