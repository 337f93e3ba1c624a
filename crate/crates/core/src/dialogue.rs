//! Dialogue data model: utterances, two-speaker dialogues and labeled examples.
//!
//! Indices are 0-based and dense. For a dialogue of `n + 1` utterances the
//! final utterance `u_n` is the one being judged and `u_0..u_{n-1}` is the
//! history.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// Marker placed before utterances of the first speaker when rendering.
pub const FIRST_SPEAKER_MARKER: &str = "<s1>";
/// Marker placed before utterances of the second speaker when rendering.
pub const SECOND_SPEAKER_MARKER: &str = "<s2>";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Utterance {
    pub speaker: String,
    pub text: String,
}

impl Utterance {
    pub fn new(speaker: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            speaker: speaker.into(),
            text: text.into(),
        }
    }
}

/// How strictly speaker alternation is enforced.
///
/// Lenient mode downgrades alternation violations to warnings. Every other
/// rule is enforced in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {field}: {rule}")]
pub struct ValidationError {
    pub field: String,
    pub rule: String,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("render index {upto} out of range for {len} utterances")]
    OutOfRange { upto: usize, len: usize },
}

/// An ordered two-speaker conversation.
///
/// Dialogues built through [`Dialogue::new`] or deserialization are validated.
/// [`Dialogue::prefix`] returns unvalidated views that may be as short as a
/// single utterance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDialogue")]
pub struct Dialogue {
    id: String,
    utterances: Vec<Utterance>,
}

#[derive(Deserialize)]
struct RawDialogue {
    id: String,
    utterances: Vec<Utterance>,
}

impl TryFrom<RawDialogue> for Dialogue {
    type Error = ValidationError;

    fn try_from(raw: RawDialogue) -> Result<Self, Self::Error> {
        Dialogue::new(raw.id, raw.utterances)
    }
}

impl Dialogue {
    /// Builds a dialogue with strict validation.
    pub fn new(id: impl Into<String>, utterances: Vec<Utterance>) -> Result<Self, ValidationError> {
        Self::with_validation(id, utterances, Validation::Strict)
    }

    pub fn with_validation(
        id: impl Into<String>,
        utterances: Vec<Utterance>,
        mode: Validation,
    ) -> Result<Self, ValidationError> {
        let dialogue = Self {
            id: id.into(),
            utterances,
        };
        dialogue.validate(mode)?;
        Ok(dialogue)
    }

    pub(crate) fn from_parts_unchecked(id: String, utterances: Vec<Utterance>) -> Self {
        Self { id, utterances }
    }

    /// Checks every dialogue invariant. In lenient mode alternation
    /// violations are logged instead of rejected.
    pub fn validate(&self, mode: Validation) -> Result<(), ValidationError> {
        if self.utterances.len() < 2 {
            return Err(ValidationError::new(
                "utterances",
                format!("need at least 2 utterances, got {}", self.utterances.len()),
            ));
        }
        for (i, u) in self.utterances.iter().enumerate() {
            if u.text.trim().is_empty() {
                return Err(ValidationError::new(
                    format!("utterances[{i}].text"),
                    "text must be non-empty after trimming",
                ));
            }
            if u.speaker.is_empty() {
                return Err(ValidationError::new(
                    format!("utterances[{i}].speaker"),
                    "speaker must be non-empty",
                ));
            }
        }
        let distinct: BTreeSet<&str> = self.utterances.iter().map(|u| u.speaker.as_str()).collect();
        if distinct.len() != 2 {
            return Err(ValidationError::new(
                "utterances",
                format!("need exactly 2 distinct speakers, got {}", distinct.len()),
            ));
        }
        let violations = self.alternation_violations();
        if let Some(&first) = violations.first() {
            match mode {
                Validation::Strict => {
                    return Err(ValidationError::new(
                        format!("utterances[{first}].speaker"),
                        "speakers must strictly alternate",
                    ))
                }
                Validation::Lenient => log::warn!(
                    "dialogue {}: speakers do not alternate at {:?}",
                    self.id,
                    violations
                ),
            }
        }
        Ok(())
    }

    /// Indices `i` where `u_i` has the same speaker as `u_{i-1}`.
    pub fn alternation_violations(&self) -> Vec<usize> {
        self.utterances
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0].speaker == w[1].speaker)
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn utterances(&self) -> &[Utterance] {
        &self.utterances
    }

    pub fn len(&self) -> usize {
        self.utterances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.utterances.is_empty()
    }

    /// Index `n` of the final utterance.
    pub fn last_index(&self) -> usize {
        self.utterances.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&Utterance> {
        self.utterances.last()
    }

    /// Speakers in order of first appearance.
    pub fn speakers(&self) -> Vec<&str> {
        let mut seen: Vec<&str> = Vec::with_capacity(2);
        for u in &self.utterances {
            if !seen.contains(&u.speaker.as_str()) {
                seen.push(&u.speaker);
            }
        }
        seen
    }

    /// The first `upto + 1` utterances as a new dialogue sharing this id.
    ///
    /// # Panics
    ///
    /// Panics if `upto` is past the end.
    pub fn prefix(&self, upto: usize) -> Dialogue {
        assert!(upto < self.len(), "prefix {upto} out of range for {} utterances", self.len());
        Self::from_parts_unchecked(self.id.clone(), self.utterances[..=upto].to_vec())
    }

    /// Concatenates `u_0..=u_upto`, each preceded by its speaker marker.
    ///
    /// The speaker who talks first gets [`FIRST_SPEAKER_MARKER`], the other one
    /// [`SECOND_SPEAKER_MARKER`].
    pub fn render_context(&self, upto: usize) -> Result<String, RenderError> {
        if upto >= self.len() {
            return Err(RenderError::OutOfRange {
                upto,
                len: self.len(),
            });
        }
        let first = &self.utterances[0].speaker;
        let mut out = String::new();
        for (i, u) in self.utterances[..=upto].iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let marker = if &u.speaker == first {
                FIRST_SPEAKER_MARKER
            } else {
                SECOND_SPEAKER_MARKER
            };
            let _ = write!(out, "{marker} {}", u.text);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Contradiction,
    NonContradiction,
}

impl Label {
    pub fn is_contradiction(self) -> bool {
        self == Label::Contradiction
    }

    pub fn from_flag(contradiction: bool) -> Self {
        if contradiction {
            Label::Contradiction
        } else {
            Label::NonContradiction
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
    HumanBot,
    A2t,
    Rct,
}

/// A dialogue with its gold label and supporting-evidence indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub dialogue: Dialogue,
    pub label: Label,
    /// History indices contradicted by the final utterance.
    pub evidence: BTreeSet<usize>,
    pub source: Option<String>,
    pub split: Option<Split>,
    /// Number of verifiers (0-3) who agreed with the label.
    pub agreement: Option<u8>,
    pub bot_type: Option<String>,
    /// Fields not known to this crate, kept for round trips.
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl LabeledExample {
    pub fn new(dialogue: Dialogue, label: Label, evidence: impl IntoIterator<Item = usize>) -> Self {
        Self {
            dialogue,
            label,
            evidence: evidence.into_iter().collect(),
            source: None,
            split: None,
            agreement: None,
            bot_type: None,
            extra: serde_json::Map::new(),
        }
    }

    pub fn with_split(mut self, split: Split) -> Self {
        self.split = Some(split);
        self
    }

    /// Validation mode that actually applies: RCT outputs are always lenient.
    pub fn effective_mode(&self, mode: Validation) -> Validation {
        if self.split == Some(Split::Rct) {
            Validation::Lenient
        } else {
            mode
        }
    }

    pub fn validate(&self, mode: Validation) -> Result<(), ValidationError> {
        self.dialogue.validate(self.effective_mode(mode))?;
        let n = self.dialogue.last_index();
        if let Some(&bad) = self.evidence.iter().find(|&&i| i >= n) {
            return Err(ValidationError::new(
                "evidence",
                format!("index {bad} out of range: evidence must lie in 0..={}", n - 1),
            ));
        }
        match self.label {
            Label::NonContradiction if !self.evidence.is_empty() => {
                return Err(ValidationError::new(
                    "evidence",
                    "non_contradiction examples must have empty evidence",
                ))
            }
            Label::Contradiction if self.evidence.is_empty() && self.split != Some(Split::HumanBot) => {
                return Err(ValidationError::new(
                    "evidence",
                    "contradiction examples need non-empty evidence outside the human_bot split",
                ))
            }
            _ => {}
        }
        if let Some(a) = self.agreement {
            if a > 3 {
                return Err(ValidationError::new("agreement", format!("{a} not in 0..=3")));
            }
        }
        Ok(())
    }
}
