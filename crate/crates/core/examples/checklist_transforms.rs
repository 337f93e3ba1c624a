//! Builds A2T and RCT variants of planted contradictions and shows how a
//! detector's verdict should (and should not) move.

use decode_core::transform::{add_two_turns, item_seed, remove_contradicting_turns, turn_pairs};
use decode_core::{detect_structured, synth, DetectorConfig, MockScorer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = synth::generate(6, 1.0, 11)?;
    let oracle = MockScorer::from_table(corpus.oracle.clone());
    let pool = turn_pairs(corpus.examples.iter().map(|e| &e.dialogue));
    let cfg = DetectorConfig::default();

    for (i, ex) in corpus.examples.iter().enumerate() {
        let a2t = add_two_turns(ex, &pool, item_seed(7, i))?;
        let rct = remove_contradicting_turns(ex)?;
        let verdict = |d| detect_structured(d, &oracle, &cfg).map(|det| det.label);
        println!(
            "{}: original {:?} ({} turns) | a2t {:?} ({} turns) | rct {:?} ({} turns)",
            ex.dialogue.id(),
            verdict(&ex.dialogue)?,
            ex.dialogue.len(),
            verdict(&a2t.dialogue)?,
            a2t.dialogue.len(),
            verdict(&rct.dialogue)?,
            rct.dialogue.len(),
        );
    }
    Ok(())
}
