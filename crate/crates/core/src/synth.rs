//! Templated two-speaker corpora with planted contradictions.
//!
//! Speaker `A` asks chit-chat questions; speaker `B` states facts about
//! themself, one fact slot per statement. In a contradicting dialogue B's
//! final turn negates one of B's earlier statements and that statement's
//! index is the evidence. Negations only ever appear as final turns of
//! contradicting dialogues, so the planted-oracle table (0.95 on every
//! planted statement/negation pair, 0.05 elsewhere) separates the two classes
//! exactly.

use std::collections::BTreeSet;

use rand::seq::{index, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dialogue::{Dialogue, Label, LabeledExample, Utterance};
use crate::scorer::MockTable;

pub const PLANTED_PROB: f64 = 0.95;
pub const BACKGROUND_PROB: f64 = 0.05;
pub const SPEAKER_A: &str = "A";
pub const SPEAKER_B: &str = "B";
const LENGTHS: [usize; 4] = [4, 6, 8, 10];

/// `(statement, negation, fillers)`; `{}` is replaced by the filler.
const FACTS: &[(&str, &str, &[&str])] = &[
    ("i have a {}", "i do not have a {}", &["dog", "cat", "parrot", "hamster"]),
    ("i live in {}", "i have never lived in {}", &["paris", "tokyo", "boston", "lima"]),
    ("i work as a {}", "i am not a {}", &["nurse", "teacher", "chef", "pilot"]),
    ("my favorite food is {}", "i never eat {}", &["pizza", "sushi", "tacos", "pasta"]),
    ("i play {} every week", "i do not play {}", &["tennis", "soccer", "chess", "golf"]),
    ("i have {} sisters", "i have no sisters", &["two", "three", "four"]),
    ("i drive a {} truck", "i do not drive a {} truck", &["red", "blue", "green"]),
    ("i play the {}", "i never learned the {}", &["piano", "violin", "guitar"]),
    ("i listen to {} all day", "i never listen to {}", &["jazz", "rock", "opera"]),
    ("i grow {} in my garden", "i do not grow {}", &["tomatoes", "roses", "herbs"]),
    ("i speak {} at home", "i do not speak {}", &["french", "spanish", "german"]),
];

const PROMPTS: &[&str] = &[
    "hello there, how are you doing today?",
    "what do you like to do for fun?",
    "tell me a bit more about yourself.",
    "that sounds nice, anything else?",
    "interesting, why is that?",
    "oh really? what else should i know?",
    "cool. how was your week?",
    "i see. what keeps you busy?",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("contradiction rate {0} outside [0, 1]")]
    RateOutOfRange(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub examples: Vec<LabeledExample>,
    /// Mock-scorer table firing on the planted pairs.
    pub oracle: MockTable,
}

struct Fact {
    statement: String,
    negation: String,
}

fn fact(rng: &mut ChaCha8Rng, slot: usize) -> Fact {
    let (statement, negation, fillers) = FACTS[slot];
    let filler = fillers.choose(rng).expect("fillers are non-empty");
    Fact {
        statement: statement.replace("{}", filler),
        negation: negation.replace("{}", filler),
    }
}

/// Number of contradicting dialogues for `n` dialogues at `rate`.
pub fn planted_count(n: usize, rate: f64) -> usize {
    ((n as f64) * rate).round() as usize
}

/// Generates `n` dialogues, `round(n * rate)` of them contradicting.
/// Identical arguments give identical corpora.
pub fn generate(n: usize, rate: f64, seed: u64) -> Result<SynthCorpus, SynthError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(SynthError::RateOutOfRange(rate));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: BTreeSet<usize> = index::sample(&mut rng, n, planted_count(n, rate).min(n))
        .into_iter()
        .collect();
    let mut oracle = MockTable::new(BACKGROUND_PROB);
    let mut examples = Vec::with_capacity(n);

    for i in 0..n {
        let len = *LENGTHS.choose(&mut rng).expect("lengths are non-empty");
        let b_turns = len / 2;
        let contradicts = planted.contains(&i);
        let statements = if contradicts { b_turns - 1 } else { b_turns };
        let slots = index::sample(&mut rng, FACTS.len(), statements).into_vec();
        let facts: Vec<Fact> = slots.iter().map(|&s| fact(&mut rng, s)).collect();

        let mut b_lines: Vec<String> = facts.iter().map(|f| f.statement.clone()).collect();
        let mut evidence = Vec::new();
        if contradicts {
            let target = rng.random_range(0..facts.len());
            b_lines.push(facts[target].negation.clone());
            evidence.push(2 * target + 1);
            oracle.insert(&facts[target].statement, &facts[target].negation, PLANTED_PROB);
        }

        let mut utts = Vec::with_capacity(len);
        for line in b_lines {
            let prompt = PROMPTS.choose(&mut rng).expect("prompts are non-empty");
            utts.push(Utterance::new(SPEAKER_A, *prompt));
            utts.push(Utterance::new(SPEAKER_B, line));
        }
        let dialogue = Dialogue::new(format!("synth-{i:05}"), utts).expect("templates produce valid dialogues");
        let mut example = LabeledExample::new(dialogue, Label::from_flag(contradicts), evidence);
        example.source = Some("synthetic".into());
        examples.push(example);
    }
    Ok(SynthCorpus { examples, oracle })
}
