//! Sequence-pair contradiction scorers.
//!
//! A scorer maps `(premise, hypothesis)` pairs to the probability that the
//! hypothesis contradicts the premise. Detectors only ever see the [`Scorer`]
//! trait; which model sits behind it is the caller's choice.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

mod heuristic;
mod mock;
mod remote;
pub mod wire;

pub use heuristic::{heuristic_score, HeuristicScorer, NEGATION_CUES, STOPWORDS};
pub use mock::{pair_key, MockScorer, MockTable, MockTableError};
pub use remote::{RemoteScorer, DEFAULT_MAX_ATTEMPTS, DEFAULT_MAX_BATCH};

/// One premise/hypothesis pair. The premise is either a rendered history or a
/// single earlier utterance; the hypothesis is the utterance under test.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoreRequest {
    pub premise: String,
    pub hypothesis: String,
}

impl ScoreRequest {
    pub fn new(premise: impl Into<String>, hypothesis: impl Into<String>) -> Self {
        Self {
            premise: premise.into(),
            hypothesis: hypothesis.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScoreError {
    #[error("score batch is empty")]
    EmptyBatch,
    #[error("request {index}: {reason}")]
    InvalidRequest { index: usize, reason: String },
    /// The remote end could not be reached. Safe to retry.
    #[error("transport failure after {attempts} attempt(s) for {} request(s): {message}", indices.len())]
    Transport {
        indices: Vec<usize>,
        attempts: u32,
        message: String,
    },
    #[error("model failure: {0}")]
    Model(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
}

impl ScoreError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, ScoreError::Transport { .. })
    }
}

/// Batch contradiction scorer.
///
/// Implementations provide [`Scorer::score_pairs`]; callers use
/// [`Scorer::score_batch`], which checks the request and response contract
/// around it. Implementations must be deterministic and safe to call from
/// several threads at once.
pub trait Scorer: Send + Sync {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError>;

    /// One probability of contradiction per request, in request order.
    fn score_batch(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        if requests.is_empty() {
            return Err(ScoreError::EmptyBatch);
        }
        for (index, r) in requests.iter().enumerate() {
            if r.premise.is_empty() || r.hypothesis.is_empty() {
                return Err(ScoreError::InvalidRequest {
                    index,
                    reason: "premise and hypothesis must be non-empty".into(),
                });
            }
        }
        let probs = self.score_pairs(requests)?;
        if probs.len() != requests.len() {
            return Err(ScoreError::Protocol(format!(
                "expected {} probabilities, got {}",
                requests.len(),
                probs.len()
            )));
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(ScoreError::Protocol(format!("probability {p} at {i} outside [0, 1]")));
        }
        Ok(probs)
    }
}

impl<S: Scorer + ?Sized> Scorer for &S {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        (**self).score_pairs(requests)
    }
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        (**self).score_pairs(requests)
    }
}

impl<S: Scorer + ?Sized> Scorer for Arc<S> {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        (**self).score_pairs(requests)
    }
}

/// Wraps a per-pair closure as a scorer.
pub struct FnScorer<F>(pub F);

impl<F> Scorer for FnScorer<F>
where
    F: Fn(&ScoreRequest) -> f64 + Send + Sync,
{
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        Ok(requests.iter().map(&self.0).collect())
    }
}
