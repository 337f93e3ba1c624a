//! Reordering of generator hypotheses by contradiction score.
//!
//! Each hypothesis is appended to the history as the bot's next turn and
//! scored with the configured detector. Hypotheses are then sorted by
//! ascending score, ties kept in generator order. Nothing is dropped.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::detect::{detect, same_speaker_history, DetectError, DetectorConfig, Strategy};
use crate::dialogue::{Dialogue, Utterance};
use crate::scorer::ScoreRequest;
use crate::scorer::Scorer;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RerankError {
    #[error("no hypotheses to rerank")]
    NoHypotheses,
    #[error("hypothesis {rank} is blank")]
    BlankHypothesis { rank: usize },
    #[error("history is empty")]
    EmptyHistory,
    #[error(transparent)]
    Detect(#[from] DetectError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedHypothesis {
    pub text: String,
    pub score: f64,
    pub original_rank: usize,
}

/// The speaker about to talk: whoever did not produce the last utterance.
pub fn next_speaker(history: &Dialogue) -> Result<String, RerankError> {
    let last = &history.last().ok_or(RerankError::EmptyHistory)?.speaker;
    if let Some(other) = history.speakers().into_iter().find(|s| s != last) {
        return Ok(other.to_owned());
    }
    // Only one speaker so far: any distinct name works, the bot has no history.
    Ok(if last == "bot" { "bot-reply".into() } else { "bot".into() })
}

/// `history` followed by `text` spoken by `speaker`.
pub fn extend_history(history: &Dialogue, speaker: &str, text: &str) -> Dialogue {
    let mut utts = history.utterances().to_vec();
    utts.push(Utterance::new(speaker, text));
    Dialogue::from_parts_unchecked(history.id().to_owned(), utts)
}

/// Contradiction score of each hypothesis as the bot's next turn. Issues at
/// most one scorer batch for the whole list.
pub fn score_hypotheses(
    history: &Dialogue,
    hypotheses: &[String],
    scorer: &dyn Scorer,
    cfg: &DetectorConfig,
) -> Result<Vec<f64>, RerankError> {
    if hypotheses.is_empty() {
        return Err(RerankError::NoHypotheses);
    }
    if let Some(rank) = hypotheses.iter().position(|h| h.trim().is_empty()) {
        return Err(RerankError::BlankHypothesis { rank });
    }
    let bot = next_speaker(history)?;
    let utts = history.utterances();
    match cfg.strategy() {
        Strategy::Structured => {
            let own = same_speaker_history(&extend_history(history, &bot, &hypotheses[0]));
            if own.is_empty() {
                return Ok(vec![0.0; hypotheses.len()]);
            }
            let requests: Vec<ScoreRequest> = hypotheses
                .iter()
                .flat_map(|h| own.iter().map(move |&i| ScoreRequest::new(utts[i].text.as_str(), h.as_str())))
                .collect();
            let probs = scorer.score_batch(&requests).map_err(DetectError::from)?;
            Ok(probs
                .chunks(own.len())
                .map(|c| c.iter().copied().fold(0.0_f64, f64::max))
                .collect())
        }
        Strategy::Unstructured => {
            let premise = history
                .render_context(history.last_index())
                .expect("last index is in range");
            let requests: Vec<ScoreRequest> = hypotheses
                .iter()
                .map(|h| ScoreRequest::new(premise.as_str(), h.as_str()))
                .collect();
            Ok(scorer.score_batch(&requests).map_err(DetectError::from)?)
        }
    }
}

pub fn rerank(
    history: &Dialogue,
    hypotheses: &[String],
    scorer: &dyn Scorer,
    cfg: &DetectorConfig,
) -> Result<Vec<RankedHypothesis>, RerankError> {
    let scores = score_hypotheses(history, hypotheses, scorer, cfg)?;
    let mut ranked: Vec<RankedHypothesis> = hypotheses
        .iter()
        .zip(scores)
        .enumerate()
        .map(|(original_rank, (text, score))| RankedHypothesis {
            text: text.clone(),
            score,
            original_rank,
        })
        .collect();
    ranked.sort_by(|a, b| match a.score.total_cmp(&b.score) {
        Ordering::Equal => a.original_rank.cmp(&b.original_rank),
        other => other,
    });
    Ok(ranked)
}

/// Fraction of `(history, chosen response)` pairs on which the detector fires
/// when the response is appended as the bot's turn.
pub fn contradiction_rate(
    pairs: &[(Dialogue, String)],
    scorer: &dyn Scorer,
    cfg: &DetectorConfig,
) -> Result<f64, RerankError> {
    if pairs.is_empty() {
        return Err(RerankError::NoHypotheses);
    }
    let mut fired = 0usize;
    for (history, response) in pairs {
        let bot = next_speaker(history)?;
        let extended = extend_history(history, &bot, response);
        fired += usize::from(detect(&extended, scorer, cfg)?.fired());
    }
    Ok(fired as f64 / pairs.len() as f64)
}
