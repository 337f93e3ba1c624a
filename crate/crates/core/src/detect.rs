//! Contradiction detectors.
//!
//! Two strategies decide whether the final utterance `u_n` contradicts the
//! history:
//!
//! * **unstructured**: one scorer call on the rendered history `u_0..u_{n-1}`
//!   against `u_n`;
//! * **structured**: one call per earlier utterance of the same speaker as
//!   `u_n`, aggregated by maximum. Pairs scoring above `eta_e` are reported as
//!   supporting evidence.
//!
//! Both label the dialogue a contradiction iff `score > tau`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dialogue::{Dialogue, Label};
use crate::scorer::{ScoreError, ScoreRequest, Scorer};

pub const DEFAULT_TAU: f64 = 0.5;
pub const DEFAULT_ETA_E: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Unstructured,
    #[default]
    Structured,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Unstructured => "unstructured",
            Strategy::Structured => "structured",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DetectError {
    #[error("{name} = {value} must lie in the open interval (0, 1)")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error("dialogue {id} has {len} utterance(s); detection needs at least one history utterance")]
    NoHistory { id: String, len: usize },
    #[error(transparent)]
    Score(#[from] ScoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    tau: f64,
    eta_e: f64,
    strategy: Strategy,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            eta_e: DEFAULT_ETA_E,
            strategy: Strategy::Structured,
        }
    }
}

impl DetectorConfig {
    pub fn new(tau: f64, eta_e: f64, strategy: Strategy) -> Result<Self, DetectError> {
        for (name, value) in [("tau", tau), ("eta_e", eta_e)] {
            if !(value > 0.0 && value < 1.0) {
                return Err(DetectError::InvalidThreshold { name, value });
            }
        }
        Ok(Self {
            tau,
            eta_e,
            strategy,
        })
    }

    pub fn structured() -> Self {
        Self::default()
    }

    pub fn unstructured() -> Self {
        Self {
            strategy: Strategy::Unstructured,
            ..Self::default()
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eta_e(&self) -> f64 {
        self.eta_e
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }
}

/// Outcome of running a detector on one dialogue.
///
/// `pair_scores`, `evidence` and `eta_e` are only present for the structured
/// strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub score: f64,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_scores: Option<BTreeMap<usize, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evidence: Option<BTreeSet<usize>>,
    pub tau: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_e: Option<f64>,
}

impl Detection {
    pub fn fired(&self) -> bool {
        self.label.is_contradiction()
    }

    /// History index of the highest pair score; the smallest index wins ties.
    pub fn argmax(&self) -> Option<usize> {
        let pairs = self.pair_scores.as_ref()?;
        let mut best: Option<(usize, f64)> = None;
        for (&i, &s) in pairs {
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((i, s));
            }
        }
        best.map(|(i, _)| i)
    }
}

fn label_for(score: f64, tau: f64) -> Label {
    Label::from_flag(score > tau)
}

fn require_history(dialogue: &Dialogue) -> Result<(), DetectError> {
    if dialogue.len() < 2 {
        return Err(DetectError::NoHistory {
            id: dialogue.id().to_owned(),
            len: dialogue.len(),
        });
    }
    Ok(())
}

/// Indices `i < n` spoken by the speaker of `u_n`, ascending.
pub fn same_speaker_history(dialogue: &Dialogue) -> Vec<usize> {
    let Some(last) = dialogue.last() else {
        return Vec::new();
    };
    let n = dialogue.last_index();
    dialogue.utterances()[..n]
        .iter()
        .enumerate()
        .filter(|(_, u)| u.speaker == last.speaker)
        .map(|(i, _)| i)
        .collect()
}

pub fn detect_unstructured(
    dialogue: &Dialogue,
    scorer: &dyn Scorer,
    cfg: &DetectorConfig,
) -> Result<Detection, DetectError> {
    require_history(dialogue)?;
    let n = dialogue.last_index();
    let premise = dialogue
        .render_context(n - 1)
        .expect("n - 1 is in range once history exists");
    let hypothesis = &dialogue.utterances()[n].text;
    let score = scorer.score_batch(&[ScoreRequest::new(premise, hypothesis.as_str())])?[0];
    Ok(Detection {
        score,
        label: label_for(score, cfg.tau),
        pair_scores: None,
        evidence: None,
        tau: cfg.tau,
        eta_e: None,
    })
}

pub fn detect_structured(
    dialogue: &Dialogue,
    scorer: &dyn Scorer,
    cfg: &DetectorConfig,
) -> Result<Detection, DetectError> {
    require_history(dialogue)?;
    let utts = dialogue.utterances();
    let hypothesis = &utts[dialogue.last_index()].text;
    let own = same_speaker_history(dialogue);

    let mut pair_scores = BTreeMap::new();
    if !own.is_empty() {
        let requests: Vec<ScoreRequest> = own
            .iter()
            .map(|&i| ScoreRequest::new(utts[i].text.as_str(), hypothesis.as_str()))
            .collect();
        let probs = scorer.score_batch(&requests)?;
        pair_scores.extend(own.iter().copied().zip(probs));
    }

    // An empty max has no value; with no earlier utterance of its own the
    // speaker cannot contradict themself.
    let score = pair_scores.values().copied().fold(0.0_f64, f64::max);
    let evidence = pair_scores
        .iter()
        .filter(|(_, &s)| s > cfg.eta_e)
        .map(|(&i, _)| i)
        .collect();
    Ok(Detection {
        score,
        label: label_for(score, cfg.tau),
        pair_scores: Some(pair_scores),
        evidence: Some(evidence),
        tau: cfg.tau,
        eta_e: Some(cfg.eta_e),
    })
}

/// Runs the strategy selected in `cfg`.
pub fn detect(dialogue: &Dialogue, scorer: &dyn Scorer, cfg: &DetectorConfig) -> Result<Detection, DetectError> {
    match cfg.strategy {
        Strategy::Unstructured => detect_unstructured(dialogue, scorer, cfg),
        Strategy::Structured => detect_structured(dialogue, scorer, cfg),
    }
}

/// Detects on every prefix `u_0..=u_k` whose last utterance belongs to
/// `target_speaker` (`k >= 1`). An absent speaker yields no detections.
pub fn detect_stream(
    dialogue: &Dialogue,
    scorer: &dyn Scorer,
    cfg: &DetectorConfig,
    target_speaker: &str,
) -> Result<Vec<(usize, Detection)>, DetectError> {
    dialogue
        .utterances()
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, u)| u.speaker == target_speaker)
        .map(|(k, _)| detect(&dialogue.prefix(k), scorer, cfg).map(|d| (k, d)))
        .collect()
}
