//! In-process stand-in for the scorer service, on its own tokio runtime.
#![allow(dead_code)]

use std::collections::VecDeque;
use std::net::TcpListener;
use std::sync::{Arc, Mutex};

use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use decode_core::scorer::heuristic_score;
use decode_core::scorer::wire::{Health, ProbsBody, ScoreBody};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Heuristic,
    Constant(f64),
    /// Returns one probability too few.
    Short,
}

#[derive(Default)]
struct Inner {
    mode: Option<Mode>,
    /// Statuses to answer with before serving normally.
    failures: VecDeque<u16>,
    batches: Vec<usize>,
    calls: usize,
}

#[derive(Clone)]
pub struct Fixture {
    pub url: String,
    inner: Arc<Mutex<Inner>>,
}

impl Fixture {
    pub fn start(mode: Mode) -> Self {
        let inner = Arc::new(Mutex::new(Inner {
            mode: Some(mode),
            ..Inner::default()
        }));
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        listener.set_nonblocking(true).unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let state = inner.clone();
        std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .unwrap();
            rt.block_on(async move {
                let app = Router::new()
                    .route("/score", post(score))
                    .route("/health", get(health))
                    .with_state(state);
                let listener = tokio::net::TcpListener::from_std(listener).unwrap();
                axum::serve(listener, app).await.unwrap();
            });
        });
        Self { url, inner }
    }

    pub fn fail_next(&self, statuses: &[u16]) {
        self.inner.lock().unwrap().failures.extend(statuses);
    }

    pub fn batches(&self) -> Vec<usize> {
        self.inner.lock().unwrap().batches.clone()
    }

    pub fn calls(&self) -> usize {
        self.inner.lock().unwrap().calls
    }
}

/// A URL nothing listens on.
pub fn dead_url() -> String {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    format!("http://{addr}")
}

async fn health() -> Json<Health> {
    Json(Health {
        status: "ok".into(),
        model: "fixture-heuristic".into(),
    })
}

async fn score(State(state): State<Arc<Mutex<Inner>>>, Json(raw): Json<Value>) -> Response {
    let mut inner = state.lock().unwrap();
    inner.calls += 1;
    if let Some(code) = inner.failures.pop_front() {
        let status = StatusCode::from_u16(code).unwrap();
        return (status, "injected failure").into_response();
    }
    let body: ScoreBody = match serde_json::from_value(raw) {
        Ok(b) => b,
        Err(e) => return (StatusCode::BAD_REQUEST, e.to_string()).into_response(),
    };
    if body.pairs.is_empty() {
        return (StatusCode::BAD_REQUEST, "empty batch").into_response();
    }
    inner.batches.push(body.pairs.len());
    let mut probs: Vec<f64> = match inner.mode.unwrap() {
        Mode::Heuristic | Mode::Short => body
            .pairs
            .iter()
            .map(|p| heuristic_score(&p.premise, &p.hypothesis))
            .collect(),
        Mode::Constant(c) => vec![c; body.pairs.len()],
    };
    if inner.mode == Some(Mode::Short) {
        probs.pop();
    }
    Json(ProbsBody { probs }).into_response()
}
