//! HTTP client for a model service speaking the [`wire`](super::wire) protocol.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;

use super::wire::{Health, ProbsBody, ScoreBody, HEALTH_PATH, SCORE_PATH};
use super::{ScoreError, ScoreRequest, Scorer};

pub const DEFAULT_MAX_BATCH: usize = 64;
pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;
const DEFAULT_BACKOFF: Duration = Duration::from_millis(200);
const DEFAULT_TIMEOUT: Duration = Duration::from_secs(60);

/// Splits batches into wire calls of at most `max_batch` pairs. A transport
/// failure is retried with exponential backoff; if a call still fails the
/// whole batch fails, so callers never see partial results.
#[derive(Debug, Clone)]
pub struct RemoteScorer {
    base_url: String,
    client: Client,
    max_batch: usize,
    max_attempts: u32,
    backoff: Duration,
}

enum CallError {
    Retryable(String),
    Fatal(ScoreError),
}

impl RemoteScorer {
    pub fn new(base_url: impl Into<String>) -> Result<Self, ScoreError> {
        let client = Client::builder()
            .timeout(DEFAULT_TIMEOUT)
            .build()
            .map_err(|e| ScoreError::Protocol(format!("cannot build HTTP client: {e}")))?;
        Ok(Self {
            base_url: base_url.into().trim_end_matches('/').to_owned(),
            client,
            max_batch: DEFAULT_MAX_BATCH,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            backoff: DEFAULT_BACKOFF,
        })
    }

    pub fn with_max_batch(mut self, max_batch: usize) -> Self {
        self.max_batch = max_batch.max(1);
        self
    }

    /// `attempts` counts the first try; `backoff` is the delay before the
    /// second one and doubles after each failure.
    pub fn with_retry(mut self, attempts: u32, backoff: Duration) -> Self {
        self.max_attempts = attempts.max(1);
        self.backoff = backoff;
        self
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn health(&self) -> Result<Health, ScoreError> {
        let url = format!("{}{HEALTH_PATH}", self.base_url);
        let resp = self.client.get(&url).send().map_err(|e| ScoreError::Transport {
            indices: vec![],
            attempts: 1,
            message: e.to_string(),
        })?;
        if !resp.status().is_success() {
            return Err(ScoreError::Protocol(format!("health returned {}", resp.status())));
        }
        resp.json::<Health>()
            .map_err(|e| ScoreError::Protocol(format!("bad health body: {e}")))
    }

    fn call(&self, pairs: &[ScoreRequest]) -> Result<Vec<f64>, CallError> {
        let url = format!("{}{SCORE_PATH}", self.base_url);
        let body = ScoreBody {
            pairs: pairs.to_vec(),
        };
        let resp = self
            .client
            .post(&url)
            .json(&body)
            .send()
            .map_err(|e| CallError::Retryable(e.to_string()))?;
        let status = resp.status();
        match status {
            StatusCode::OK => {
                let probs: ProbsBody = resp
                    .json()
                    .map_err(|e| CallError::Fatal(ScoreError::Protocol(format!("bad score body: {e}"))))?;
                if probs.probs.len() != pairs.len() {
                    return Err(CallError::Fatal(ScoreError::Protocol(format!(
                        "sent {} pairs, got {} probabilities",
                        pairs.len(),
                        probs.probs.len()
                    ))));
                }
                Ok(probs.probs)
            }
            StatusCode::INTERNAL_SERVER_ERROR => {
                let text = resp.text().unwrap_or_default();
                Err(CallError::Fatal(ScoreError::Model(text)))
            }
            StatusCode::BAD_GATEWAY
            | StatusCode::SERVICE_UNAVAILABLE
            | StatusCode::GATEWAY_TIMEOUT
            | StatusCode::TOO_MANY_REQUESTS => Err(CallError::Retryable(format!("server returned {status}"))),
            other => {
                let text = resp.text().unwrap_or_default();
                Err(CallError::Fatal(ScoreError::Protocol(format!(
                    "server returned {other}: {text}"
                ))))
            }
        }
    }

    fn call_with_retry(&self, pairs: &[ScoreRequest], total: usize) -> Result<Vec<f64>, ScoreError> {
        let mut delay = self.backoff;
        let mut last = String::new();
        for attempt in 1..=self.max_attempts {
            match self.call(pairs) {
                Ok(probs) => return Ok(probs),
                Err(CallError::Fatal(e)) => return Err(e),
                Err(CallError::Retryable(msg)) => {
                    log::warn!("scorer call attempt {attempt}/{} failed: {msg}", self.max_attempts);
                    last = msg;
                    if attempt < self.max_attempts {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
            }
        }
        Err(ScoreError::Transport {
            indices: (0..total).collect(),
            attempts: self.max_attempts,
            message: last,
        })
    }
}

impl Scorer for RemoteScorer {
    fn score_pairs(&self, requests: &[ScoreRequest]) -> Result<Vec<f64>, ScoreError> {
        let mut out = Vec::with_capacity(requests.len());
        for chunk in requests.chunks(self.max_batch) {
            out.extend(self.call_with_retry(chunk, requests.len())?);
        }
        Ok(out)
    }
}
