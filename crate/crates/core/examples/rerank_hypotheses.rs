//! Pushes self-contradicting candidate replies to the bottom of a beam.

use decode_core::rerank::{contradiction_rate, rerank};
use decode_core::{DetectorConfig, Dialogue, HeuristicScorer, Utterance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let history = Dialogue::new(
        "beam",
        vec![
            Utterance::new("human", "tell me about your family"),
            Utterance::new("bot", "i have three sisters and a brother"),
            Utterance::new("human", "are you close to them?"),
        ],
    )?;
    let beam = [
        "i do not have any sisters",
        "yes, my sisters live nearby",
        "we talk every week",
    ]
    .map(String::from);

    let cfg = DetectorConfig::default();
    let ranked = rerank(&history, &beam, &HeuristicScorer, &cfg)?;
    for r in &ranked {
        println!("{:.3}  (was #{})  {}", r.score, r.original_rank, r.text);
    }

    let before = contradiction_rate(&[(history.clone(), beam[0].clone())], &HeuristicScorer, &cfg)?;
    let after = contradiction_rate(&[(history, ranked[0].text.clone())], &HeuristicScorer, &cfg)?;
    println!("top-1 contradiction rate: {before} -> {after}");
    Ok(())
}
