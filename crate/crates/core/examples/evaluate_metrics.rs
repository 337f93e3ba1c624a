//! Computes the evaluation metrics on a generated corpus scored by the
//! heuristic detector.

use decode_core::eval::{roc_auc, strict_report, Averaging};
use decode_core::{detect_structured, synth, DetectorConfig, HeuristicScorer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = synth::generate(200, 0.5, 42)?;
    let cfg = DetectorConfig::default();
    let preds = corpus
        .examples
        .iter()
        .map(|ex| detect_structured(&ex.dialogue, &HeuristicScorer, &cfg))
        .collect::<Result<Vec<_>, _>>()?;

    let report = strict_report(&preds, &corpus.examples, Averaging::Micro)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    let scores: Vec<f64> = preds.iter().map(|d| d.score).collect();
    let labels: Vec<bool> = corpus.examples.iter().map(|e| e.label.is_contradiction()).collect();
    println!("auc recomputed directly: {:.4}", roc_auc(&scores, &labels)?);
    Ok(())
}
