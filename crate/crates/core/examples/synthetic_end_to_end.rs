//! Synthetic corpus, JSONL round trip, detection with the planted oracle and
//! a strict evaluation report.

use decode_core::corpus::{parse_corpus_str, to_jsonl};
use decode_core::eval::{strict_report, Averaging};
use decode_core::{detect_structured, synth, DetectorConfig, MockScorer, Validation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200);
    let corpus = synth::generate(n, 0.5, 1)?;

    let jsonl = to_jsonl(&corpus.examples);
    println!("first line: {}", jsonl.lines().next().unwrap_or_default());
    let gold = parse_corpus_str(&jsonl, Validation::Strict)?;

    let oracle = MockScorer::from_table(corpus.oracle);
    let cfg = DetectorConfig::default();
    let preds = gold
        .iter()
        .map(|ex| detect_structured(&ex.dialogue, &oracle, &cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let report = strict_report(&preds, &gold, Averaging::Micro)?;
    println!(
        "n={} accuracy={:?} strict={:?} se_f1={:?} scorer batches={}",
        gold.len(),
        report.accuracy,
        report.strict_accuracy,
        report.se_f1,
        oracle.batch_sizes().len()
    );
    Ok(())
}
