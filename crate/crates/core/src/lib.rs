//! Self-contradiction detection for two-speaker dialogues.
//!
//! * [`dialogue`] and [`corpus`]: data model and the JSONL corpus format.
//! * [`scorer`]: the sequence-pair contradiction model behind a trait, with a
//!   lexical heuristic, a table-driven mock and an HTTP client.
//! * [`detect`]: unstructured and structured (utterance-based) detectors,
//!   supporting-evidence retrieval and per-turn stream detection.
//! * [`transform`]: A2T / RCT checklist sets and length-balanced sampling.
//! * [`eval`]: accuracy, strict accuracy, evidence and stream P/R/F1, ROC-AUC,
//!   fire rates and Pearson correlation.
//! * [`rerank`]: generation hypothesis reranking.
//! * [`synth`]: synthetic corpora with planted contradictions.
//! * [`cli`]: the `decode` command line.

pub mod cli;
pub mod corpus;
pub mod detect;
pub mod dialogue;
pub mod eval;
pub mod rerank;
pub mod scorer;
pub mod synth;
pub mod transform;

pub use detect::{detect, detect_stream, detect_structured, detect_unstructured, Detection, DetectorConfig, Strategy};
pub use dialogue::{Dialogue, Label, LabeledExample, Split, Utterance, Validation};
pub use scorer::{HeuristicScorer, MockScorer, RemoteScorer, ScoreRequest, Scorer};
