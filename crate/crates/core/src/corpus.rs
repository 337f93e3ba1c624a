//! JSONL corpus reading and writing.
//!
//! One JSON object per line:
//!
//! ```text
//! {"id": str, "utterances": [{"speaker": str, "text": str}, ...],
//!  "label": "contradiction"|"non_contradiction", "evidence": [int, ...],
//!  "source": str?, "split": str?, "agreement": int?, "bot_type": str?}
//! ```
//!
//! Fields this crate does not know about are carried in
//! [`LabeledExample::extra`] and written back out unchanged.

use std::collections::BTreeSet;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dialogue::{
    Dialogue, Label, LabeledExample, Split, Utterance, Validation, ValidationError,
};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("line {line}: malformed JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {source}")]
    Invalid {
        line: usize,
        #[source]
        source: ValidationError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CorpusError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Json { line, .. } | CorpusError::Invalid { line, .. } => Some(*line),
            CorpusError::Io(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Record {
    id: String,
    utterances: Vec<Utterance>,
    label: Label,
    #[serde(default)]
    evidence: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    split: Option<Split>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    agreement: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bot_type: Option<String>,
    #[serde(flatten)]
    extra: serde_json::Map<String, serde_json::Value>,
}

impl Record {
    fn into_example(self, mode: Validation) -> Result<LabeledExample, ValidationError> {
        let mut evidence = BTreeSet::new();
        for i in self.evidence {
            if !evidence.insert(i) {
                return Err(ValidationError::new("evidence", format!("duplicate index {i}")));
            }
        }
        let example = LabeledExample {
            dialogue: Dialogue::from_parts_unchecked(self.id, self.utterances),
            label: self.label,
            evidence,
            source: self.source,
            split: self.split,
            agreement: self.agreement,
            bot_type: self.bot_type,
            extra: self.extra,
        };
        example.validate(mode)?;
        Ok(example)
    }

    fn from_example(example: &LabeledExample) -> Self {
        Self {
            id: example.dialogue.id().to_owned(),
            utterances: example.dialogue.utterances().to_vec(),
            label: example.label,
            evidence: example.evidence.iter().copied().collect(),
            source: example.source.clone(),
            split: example.split,
            agreement: example.agreement,
            bot_type: example.bot_type.clone(),
            extra: example.extra.clone(),
        }
    }
}

/// Parses and validates every line. Blank lines are skipped; line numbers in
/// errors are 1-based.
pub fn parse_corpus<R: BufRead>(reader: R, mode: Validation) -> Result<Vec<LabeledExample>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_line(&line, line_no, mode)?);
    }
    Ok(out)
}

pub fn parse_corpus_str(text: &str, mode: Validation) -> Result<Vec<LabeledExample>, CorpusError> {
    parse_corpus(text.as_bytes(), mode)
}

pub fn parse_line(line: &str, line_no: usize, mode: Validation) -> Result<LabeledExample, CorpusError> {
    let record: Record = serde_json::from_str(line).map_err(|source| CorpusError::Json {
        line: line_no,
        source,
    })?;
    record.into_example(mode).map_err(|source| CorpusError::Invalid {
        line: line_no,
        source,
    })
}

pub fn to_json_line(example: &LabeledExample) -> String {
    serde_json::to_string(&Record::from_example(example)).expect("records always serialize")
}

pub fn serialize_corpus<W: Write>(examples: &[LabeledExample], mut writer: W) -> io::Result<()> {
    for example in examples {
        writeln!(writer, "{}", to_json_line(example))?;
    }
    Ok(())
}

pub fn to_jsonl(examples: &[LabeledExample]) -> String {
    let mut buf = Vec::new();
    serialize_corpus(examples, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
