//! JSON bodies of the scorer HTTP protocol.
//!
//! ```text
//! POST /score   {"pairs":[{"premise":..,"hypothesis":..},..]} -> 200 {"probs":[..]}
//!               400 malformed body, 500 model failure
//! GET  /health  -> 200 {"status":"ok","model":..}
//! ```

use serde::{Deserialize, Serialize};

use super::ScoreRequest;

pub const SCORE_PATH: &str = "/score";
pub const HEALTH_PATH: &str = "/health";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBody {
    pub pairs: Vec<ScoreRequest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbsBody {
    pub probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub model: String,
}

impl Health {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}
