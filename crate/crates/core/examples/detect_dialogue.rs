//! Structured and unstructured detection on a short persona chat.
//!
//! ```sh
//! cargo run --example detect_dialogue
//! ```

use decode_core::{detect, DetectorConfig, Dialogue, HeuristicScorer, Utterance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dialogue = Dialogue::new(
        "pets",
        vec![
            Utterance::new("human", "do you have any pets?"),
            Utterance::new("bot", "i have two dogs and a cat"),
            Utterance::new("human", "what are their names?"),
            Utterance::new("bot", "i do not have dogs"),
        ],
    )?;
    println!("{}\n", dialogue.render_context(dialogue.last_index())?);

    for cfg in [DetectorConfig::structured(), DetectorConfig::unstructured()] {
        let det = detect(&dialogue, &HeuristicScorer, &cfg)?;
        println!("{:?}: score {:.3} -> {:?}", cfg.strategy(), det.score, det.label);
        if let Some(evidence) = &det.evidence {
            for &i in evidence {
                println!("  evidence u{i}: {}", dialogue.utterances()[i].text);
            }
        }
    }
    Ok(())
}
