mod fixture_server;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use decode_core::cli::DetectionRecord;
use decode_core::corpus::parse_corpus_str;
use decode_core::eval::{EvalReport, StreamFlag};
use decode_core::{Label, Validation};
use fixture_server::{dead_url, Fixture, Mode};
use serde_json::Value;
use tempfile::TempDir;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, body: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    fn run(&self, args: &[&str]) -> Output {
        self.run_env(args, &[])
    }

    fn run_env(&self, args: &[&str], env: &[(&str, &str)]) -> Output {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_decode"));
        cmd.current_dir(self.dir.path())
            .env_remove("DECODE_SCORER_URL")
            .env_remove("DECODE_WORKERS")
            .args(args);
        for (k, v) in env {
            cmd.env(k, v);
        }
        cmd.output().unwrap()
    }

    fn ok(&self, args: &[&str]) {
        let out = self.run(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }

    fn synth(&self, n: usize, rate: &str, seed: &str) {
        self.ok(&["synth", "--n", &n.to_string(), "--contradiction-rate", rate, "--seed", seed, "--out", "synth.jsonl"]);
    }
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn records(text: &str) -> Vec<DetectionRecord> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

const TWO_EXAMPLES: &str = r#"{"id":"d1","utterances":[{"speaker":"A","text":"do you have pets?"},{"speaker":"B","text":"i have two dogs"},{"speaker":"A","text":"nice"},{"speaker":"B","text":"i do not have dogs"}],"label":"contradiction","evidence":[1]}
{"id":"d2","utterances":[{"speaker":"A","text":"hi"},{"speaker":"B","text":"i like tea"},{"speaker":"A","text":"me too"},{"speaker":"B","text":"tea is great"}],"label":"non_contradiction"}
"#;

#[test]
fn detect_writes_one_line_per_example() {
    let sb = Sandbox::new();
    sb.write("in.jsonl", TWO_EXAMPLES);
    sb.write(
        "mock.json",
        &serde_json::json!({
            "default": 0.1,
            "pairs": { decode_core::scorer::pair_key("i have two dogs", "i do not have dogs"): 0.92 }
        })
        .to_string(),
    );
    sb.ok(&["detect", "--in", "in.jsonl", "--out", "out.jsonl", "--scorer", "mock:mock.json"]);
    let recs = records(&sb.read("out.jsonl"));
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0].id, "d1");
    assert_eq!(recs[0].detection.score, 0.92);
    assert_eq!(recs[0].detection.label, Label::Contradiction);
    assert_eq!(recs[1].detection.score, 0.1);
    assert_eq!(recs[1].detection.label, Label::NonContradiction);

    sb.ok(&["detect", "--in", "in.jsonl", "--out", "h.jsonl", "--strategy", "unstructured"]);
    let recs = records(&sb.read("h.jsonl"));
    assert!(recs[0].detection.pair_scores.is_none());
}

#[test]
fn exit_codes() {
    let sb = Sandbox::new();
    sb.write("in.jsonl", TWO_EXAMPLES);
    let bad_tau = sb.run(&["detect", "--in", "in.jsonl", "--out", "o", "--tau", "1.5"]);
    assert_eq!(code(&bad_tau), 2);
    assert!(String::from_utf8_lossy(&bad_tau.stderr).contains("tau"));

    assert_eq!(code(&sb.run(&["detect", "--in", "missing.jsonl", "--out", "o"])), 1);
    assert_eq!(code(&sb.run(&["detect", "--in", "in.jsonl", "--out", "o", "--scorer", "magic"])), 2);
    assert_eq!(code(&sb.run(&["detect", "--bogus"])), 2);

    sb.write("broken.jsonl", &format!("{}\n{{not json\n", TWO_EXAMPLES.lines().next().unwrap()));
    let broken = sb.run(&["detect", "--in", "broken.jsonl", "--out", "o"]);
    assert_eq!(code(&broken), 2);
    assert!(String::from_utf8_lossy(&broken.stderr).contains("line 2"));

    let url = format!("remote:{}", dead_url());
    let down = sb.run(&["detect", "--in", "in.jsonl", "--out", "o", "--scorer", &url]);
    assert_eq!(code(&down), 3);
}

#[test]
fn scorer_url_from_environment_unless_flag_given() {
    let fx = Fixture::start(Mode::Constant(0.8));
    let sb = Sandbox::new();
    sb.write("in.jsonl", TWO_EXAMPLES);
    let env = [("DECODE_SCORER_URL", fx.url.as_str())];
    let out = sb.run_env(&["detect", "--in", "in.jsonl", "--out", "env.jsonl"], &env);
    assert!(out.status.success());
    assert!(records(&sb.read("env.jsonl")).iter().all(|r| r.detection.score == 0.8));

    let out = sb.run_env(&["detect", "--in", "in.jsonl", "--out", "flag.jsonl", "--scorer", "heuristic"], &env);
    assert!(out.status.success());
    let recs = records(&sb.read("flag.jsonl"));
    assert_eq!(recs[0].detection.score, 1.0);
    assert_eq!(fx.batches(), vec![1, 1]);
}

#[test]
fn synth_detect_evaluate_round_trip() {
    let sb = Sandbox::new();
    sb.synth(40, "0.25", "3");
    let corpus = parse_corpus_str(&sb.read("synth.jsonl"), Validation::Strict).unwrap();
    assert_eq!(corpus.len(), 40);
    assert_eq!(corpus.iter().filter(|e| e.label == Label::Contradiction).count(), 10);
    assert!(sb.path("synth.jsonl.oracle.json").exists());

    sb.ok(&["detect", "--in", "synth.jsonl", "--out", "preds.jsonl", "--scorer", "mock:synth.jsonl.oracle.json"]);
    for mode in ["balanced", "strict"] {
        let report = format!("{mode}.json");
        sb.ok(&["evaluate", "--mode", mode, "--preds", "preds.jsonl", "--gold", "synth.jsonl", "--report", &report]);
        let r: EvalReport = serde_json::from_str(&sb.read(&report)).unwrap();
        assert_eq!(r.accuracy, Some(1.0));
        assert_eq!(r.auc, Some(1.0));
        if mode == "strict" {
            assert_eq!((r.strict_accuracy, r.se_f1), (Some(1.0), Some(1.0)));
        } else {
            assert_eq!(r.se_f1, None);
        }
    }
    let raw: Value = serde_json::from_str(&sb.read("balanced.json")).unwrap();
    assert!(raw["strict_accuracy"].is_null());

    sb.ok(&[
        "detect", "--in", "synth.jsonl", "--out", "stream.jsonl", "--scorer", "mock:synth.jsonl.oracle.json",
        "--target-speaker", "B",
    ]);
    let stream = records(&sb.read("stream.jsonl"));
    let flags: Vec<String> = stream
        .iter()
        .map(|r| {
            let ex = corpus.iter().find(|e| e.dialogue.id() == r.id).unwrap();
            let index = r.index.unwrap();
            let flag = StreamFlag {
                id: r.id.clone(),
                index,
                contradiction: ex.label.is_contradiction() && index == ex.dialogue.last_index(),
                agreement: None,
                category: None,
                bot_type: None,
            };
            serde_json::to_string(&flag).unwrap()
        })
        .collect();
    sb.write("flags.jsonl", &flags.join("\n"));
    sb.ok(&["evaluate", "--mode", "stream", "--preds", "stream.jsonl", "--gold", "flags.jsonl", "--report", "s.json"]);
    let r: EvalReport = serde_json::from_str(&sb.read("s.json")).unwrap();
    assert_eq!(r.stream_f1, Some(1.0));
    assert_eq!(r.fire_rates["bot_marked"], 1.0);
    assert_eq!(r.fire_rates["bot_unmarked"], 0.0);

    let mismatch = sb.run(&["evaluate", "--mode", "stream", "--preds", "preds.jsonl", "--gold", "flags.jsonl", "--report", "x"]);
    assert_eq!(code(&mismatch), 2);
}

#[test]
fn transform_ops() {
    let sb = Sandbox::new();
    sb.synth(30, "0.5", "8");
    sb.ok(&["transform", "--op", "rct", "--in", "synth.jsonl", "--out", "rct.jsonl"]);
    let rct = parse_corpus_str(&sb.read("rct.jsonl"), Validation::Lenient).unwrap();
    assert_eq!(rct.len(), 15);
    assert!(rct.iter().all(|e| e.label == Label::NonContradiction));

    sb.ok(&["transform", "--op", "a2t", "--in", "synth.jsonl", "--seed", "2", "--out", "a2t.jsonl"]);
    let a2t = parse_corpus_str(&sb.read("a2t.jsonl"), Validation::Strict).unwrap();
    assert_eq!(a2t.len(), 15);
    assert!(a2t.iter().all(|e| e.label == Label::Contradiction));

    sb.ok(&["synth", "--n", "200", "--contradiction-rate", "0", "--seed", "9", "--out", "neg.jsonl"]);
    sb.ok(&["transform", "--op", "balance", "--in", "synth.jsonl", "--pool", "neg.jsonl", "--out", "bal.jsonl"]);
    let bal = parse_corpus_str(&sb.read("bal.jsonl"), Validation::Strict).unwrap();
    assert_eq!(bal.len(), 15);

    let no_pool = sb.run(&["transform", "--op", "balance", "--in", "synth.jsonl", "--out", "x"]);
    assert_eq!(code(&no_pool), 2);
}

#[test]
fn rerank_writes_tsv_in_score_order() {
    let sb = Sandbox::new();
    sb.write(
        "history.json",
        r#"{"id":"h","utterances":[{"speaker":"human","text":"hi"},{"speaker":"bot","text":"i have two dogs"},{"speaker":"human","text":"tell me more"}]}"#,
    );
    sb.write("hyps.txt", "i do not have dogs\ni love my\tdogs\n\nthey are cute\n");
    sb.ok(&["rerank", "--history", "history.json", "--hyps", "hyps.txt", "--out", "ranked.tsv"]);
    let lines: Vec<Vec<String>> = sb
        .read("ranked.tsv")
        .lines()
        .map(|l| l.split('\t').map(str::to_owned).collect())
        .collect();
    assert_eq!(lines.len(), 3);
    assert!(lines.iter().all(|cols| cols.len() == 3));
    assert_eq!(lines[2][0], "0");
    assert_eq!(lines[2][1], "1");
    assert!(lines.iter().any(|cols| cols[2] == "i love my dogs"));
}

fn same_bytes(a: &Path, b: &Path) -> bool {
    std::fs::read(a).unwrap() == std::fs::read(b).unwrap()
}

#[test]
fn worker_count_does_not_change_output() {
    let sb = Sandbox::new();
    sb.synth(60, "0.5", "5");
    for w in ["1", "4"] {
        let out = format!("w{w}.jsonl");
        sb.ok(&["detect", "--in", "synth.jsonl", "--out", &out, "--workers", w]);
    }
    assert!(same_bytes(&sb.path("w1.jsonl"), &sb.path("w4.jsonl")));
    let out = sb.run_env(&["detect", "--in", "synth.jsonl", "--out", "env.jsonl"], &[("DECODE_WORKERS", "3")]);
    assert!(out.status.success());
    assert!(same_bytes(&sb.path("w1.jsonl"), &sb.path("env.jsonl")));
}
