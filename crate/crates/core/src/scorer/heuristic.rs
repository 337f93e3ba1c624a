//! Lexical stand-in for a trained NLI model.
//!
//! `score = overlap * polarity` where `overlap` is the fraction of the
//! hypothesis' content words also found in the premise, and `polarity` is 1
//! when exactly one side carries a negation cue, otherwise `0.15 * overlap`.
//! Good enough to exercise pipelines offline; not a contradiction model.

use std::collections::BTreeSet;

use super::{ScoreError, ScoreRequest, Scorer};

/// Negation cues. `n't` matches as a suffix (`don't`, `isn't`).
pub const NEGATION_CUES: [&str; 4] = ["not", "n't", "never", "no"];

pub const STOPWORDS: &[&str] = &[
    "a", "about", "also", "am", "an", "and", "are", "as", "at", "be", "been", "being", "but",
    "by", "did", "do", "does", "for", "from", "he", "her", "here", "him", "his", "how", "i",
    "in", "is", "it", "its", "just", "me", "mine", "my", "of", "on", "or", "our", "really",
    "she", "so", "that", "the", "their", "them", "there", "these", "they", "this", "those",
    "to", "too", "up", "us", "very", "was", "we", "were", "what", "which", "who", "with",
    "you", "your", "yours",
];

const SAME_POLARITY_FACTOR: f64 = 0.15;

fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !(c.is_alphanumeric() || c == '\'' || c == '\u{2019}'))
        .map(|t| t.replace('\u{2019}', "'").trim_matches('\'').to_lowercase())
        .filter(|t| !t.is_empty())
}

fn is_negation(token: &str) -> bool {
    NEGATION_CUES.iter().any(|&cue| {
        if cue.contains('\'') {
            token.ends_with(cue)
        } else {
            token == cue
        }
    })
}

struct Bag {
    content: BTreeSet<String>,
    negated: bool,
}

fn bag(text: &str) -> Bag {
    let mut content = BTreeSet::new();
    let mut negated = false;
    for t in tokens(text) {
        if is_negation(&t) {
            negated = true;
        } else if !STOPWORDS.contains(&t.as_str()) {
            content.insert(t);
        }
    }
    Bag { content, negated }
}

pub fn heuristic_score(premise: &str, hypothesis: &str) -> f64 {
    let p = bag(premise);
    let h = bag(hypothesis);
    let overlap = if h.content.is_empty() {
        0.0
    } else {
        h.content.intersection(&p.content).count() as f64 / h.content.len() as f64
    };
    let polarity = if p.negated != h.negated {
        1.0
    } else {
        SAME_POLARITY_FACTOR * overlap
    };
    (overlap * polarity).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct HeuristicScorer;

impl Scorer for HeuristicScorer {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        Ok(requests
            .iter()
            .map(|r| heuristic_score(&r.premise, &r.hypothesis))
            .collect())
    }
}
