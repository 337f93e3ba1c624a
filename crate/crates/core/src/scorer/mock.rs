//! Table-driven scorer for deterministic tests.
//!
//! Pairs are keyed by a SHA-256 digest of `premise 0x1F hypothesis`, so a
//! table file never has to carry the raw text. Unknown pairs get the table
//! default.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{ScoreError, ScoreRequest, Scorer};

pub fn pair_key(premise: &str, hypothesis: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(premise.as_bytes());
    hasher.update([0x1f]);
    hasher.update(hypothesis.as_bytes());
    hex::encode(hasher.finalize())
}

/// On-disk form: `{"default": 0.05, "pairs": {"<sha256 hex>": 0.95, ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockTable {
    pub default: f64,
    #[serde(default)]
    pub pairs: BTreeMap<String, f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum MockTableError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("malformed mock table: {0}")]
    Json(#[from] serde_json::Error),
    #[error("probability {value} for {key} outside [0, 1]")]
    Range { key: String, value: f64 },
}

impl MockTable {
    pub fn new(default: f64) -> Self {
        Self {
            default,
            pairs: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, premise: &str, hypothesis: &str, prob: f64) {
        self.pairs.insert(pair_key(premise, hypothesis), prob);
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, MockTableError> {
        let table: MockTable = serde_json::from_reader(reader)?;
        table.check()?;
        Ok(table)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MockTableError> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    pub fn write_to<W: Write>(&self, writer: W) -> Result<(), MockTableError> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MockTableError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }

    fn check(&self) -> Result<(), MockTableError> {
        let bad = std::iter::once(("default", self.default))
            .chain(self.pairs.iter().map(|(k, v)| (k.as_str(), *v)))
            .find(|(_, v)| !(0.0..=1.0).contains(v));
        match bad {
            Some((key, value)) => Err(MockTableError::Range {
                key: key.to_owned(),
                value,
            }),
            None => Ok(()),
        }
    }
}

/// Scorer backed by a [`MockTable`]. Records the size of every batch it
/// receives so tests can assert on call patterns.
#[derive(Debug)]
pub struct MockScorer {
    table: HashMap<String, f64>,
    default: f64,
    batches: Mutex<Vec<usize>>,
}

impl MockScorer {
    pub fn new(default: f64) -> Self {
        Self::from_table(MockTable::new(default))
    }

    pub fn from_table(table: MockTable) -> Self {
        Self {
            table: table.pairs.into_iter().collect(),
            default: table.default,
            batches: Mutex::new(Vec::new()),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MockTableError> {
        MockTable::load(path).map(Self::from_table)
    }

    pub fn with_pair(mut self, premise: &str, hypothesis: &str, prob: f64) -> Self {
        self.insert(premise, hypothesis, prob);
        self
    }

    pub fn insert(&mut self, premise: &str, hypothesis: &str, prob: f64) {
        self.table.insert(pair_key(premise, hypothesis), prob);
    }

    pub fn lookup(&self, premise: &str, hypothesis: &str) -> f64 {
        self.table
            .get(&pair_key(premise, hypothesis))
            .copied()
            .unwrap_or(self.default)
    }

    /// Sizes of the batches seen so far, in call order.
    pub fn batch_sizes(&self) -> Vec<usize> {
        self.batches.lock().expect("poisoned").clone()
    }

    pub fn reset_calls(&self) {
        self.batches.lock().expect("poisoned").clear();
    }
}

impl Scorer for MockScorer {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        self.batches.lock().expect("poisoned").push(requests.len());
        Ok(requests
            .iter()
            .map(|r| self.lookup(&r.premise, &r.hypothesis))
            .collect())
    }
}
