//! Detection backed by a running scorer service.
//!
//! ```sh
//! DECODE_SCORER_URL=http://127.0.0.1:8000 cargo run --example remote_scorer
//! ```

use decode_core::{detect_structured, DetectorConfig, Dialogue, RemoteScorer, Utterance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let Ok(url) = std::env::var("DECODE_SCORER_URL") else {
        eprintln!("set DECODE_SCORER_URL to the base URL of a scorer service");
        return Ok(());
    };
    let scorer = RemoteScorer::new(url)?.with_max_batch(32);
    let health = scorer.health()?;
    println!("service {} model {}", health.status, health.model);

    let dialogue = Dialogue::new(
        "remote",
        vec![
            Utterance::new("A", "what do you drink in the morning?"),
            Utterance::new("B", "always black coffee"),
            Utterance::new("A", "no tea?"),
            Utterance::new("B", "i never drink coffee"),
        ],
    )?;
    let det = detect_structured(&dialogue, &scorer, &DetectorConfig::default())?;
    println!("{}", serde_json::to_string_pretty(&det)?);
    Ok(())
}
