//! Flags every bot turn against the bot's own earlier turns.

use decode_core::{detect_stream, DetectorConfig, Dialogue, HeuristicScorer, Utterance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let turns = [
        ("human", "hi there, where do you live?"),
        ("bot", "i live in a small town near the coast"),
        ("human", "do you work?"),
        ("bot", "yes, i am a nurse at the local hospital"),
        ("human", "sounds busy"),
        ("bot", "it is, i never work nights though"),
        ("human", "what do you do after work?"),
        ("bot", "i am not a nurse at the hospital"),
    ];
    let dialogue = Dialogue::new("stream", turns.iter().map(|(s, t)| Utterance::new(*s, *t)).collect())?;

    for (k, det) in detect_stream(&dialogue, &HeuristicScorer, &DetectorConfig::default(), "bot")? {
        let mark = if det.fired() { "!!" } else { "  " };
        println!("{mark} u{k} score {:.3}  {}", det.score, dialogue.utterances()[k].text);
    }
    Ok(())
}
