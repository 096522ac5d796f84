//! Client for an external HTTP emotion-scoring service.
//!
//! Each segment is sent as `{"text": "<surface>"}` and the five scores are
//! read from configurable fields of the JSON response. Results accumulate in a
//! [`PrecomputedEmotionStore`] file that doubles as a resume point: keys
//! already present are never requested again. Keys that still fail after all
//! retries are listed one per line in `<out>.failed`.

pub mod stub;

use std::path::{Path, PathBuf};
use std::thread::sleep;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::corpus::Segment;
use crate::emotion::{EmotionScores, PrecomputedEmotionStore, DIMENSION_NAMES, EMOTION_DIMS};
use crate::error::{write_text, Error, Result};

/// Response field for each score. Dots descend into nested objects.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldPaths {
    pub valence: String,
    pub joy: String,
    pub anger: String,
    pub fear: String,
    pub sadness: String,
}

impl Default for FieldPaths {
    fn default() -> Self {
        FieldPaths {
            valence: "valence".into(),
            joy: "joy".into(),
            anger: "anger".into(),
            fear: "fear".into(),
            sadness: "sadness".into(),
        }
    }
}

impl FieldPaths {
    fn ordered(&self) -> [&str; EMOTION_DIMS] {
        [
            &self.valence,
            &self.joy,
            &self.anger,
            &self.fear,
            &self.sadness,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    pub url: String,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub requests_per_second: f64,
    pub field_paths: FieldPaths,
    /// First retry delay; doubles on every further attempt.
    pub backoff_base_ms: u64,
    pub bearer_token: Option<String>,
    /// Successful fetches between store flushes.
    pub flush_every: usize,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        EndpointConfig {
            url: String::new(),
            timeout_ms: 10_000,
            max_retries: 3,
            requests_per_second: 5.0,
            field_paths: FieldPaths::default(),
            backoff_base_ms: 500,
            bearer_token: None,
            flush_every: 50,
        }
    }
}

impl EndpointConfig {
    pub fn new(url: impl Into<String>) -> Self {
        EndpointConfig {
            url: url.into(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.url.trim().is_empty() {
            return Err(Error::Config("endpoint url is empty".into()));
        }
        if self.timeout_ms == 0 {
            return Err(Error::Config("timeout_ms must be positive".into()));
        }
        if !(self.requests_per_second > 0.0 && self.requests_per_second.is_finite()) {
            return Err(Error::Config("requests_per_second must be positive".into()));
        }
        Ok(())
    }

    fn min_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.requests_per_second)
    }
}

/// Why a single attempt failed.
#[derive(Debug)]
enum Attempt {
    Transient(String),
    Fatal(Error),
}

/// One in-flight request at a time, spaced by the configured rate.
pub struct ScoreClient {
    config: EndpointConfig,
    http: reqwest::blocking::Client,
    next_slot: Option<Instant>,
    requests_sent: usize,
}

impl ScoreClient {
    pub fn new(config: EndpointConfig) -> Result<Self> {
        config.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(config.timeout_ms))
            .build()
            .map_err(|e| Error::Http(e.to_string()))?;
        Ok(ScoreClient {
            config,
            http,
            next_slot: None,
            requests_sent: 0,
        })
    }

    pub fn requests_sent(&self) -> usize {
        self.requests_sent
    }

    fn wait_for_slot(&mut self) {
        if let Some(slot) = self.next_slot {
            let now = Instant::now();
            if slot > now {
                sleep(slot - now);
            }
        }
        self.next_slot = Some(Instant::now() + self.config.min_interval());
    }

    fn attempt(&mut self, body: &str) -> std::result::Result<EmotionScores, Attempt> {
        self.wait_for_slot();
        self.requests_sent += 1;
        let mut req = self
            .http
            .post(&self.config.url)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string());
        if let Some(token) = &self.config.bearer_token {
            req = req.bearer_auth(token);
        }
        let resp = req
            .send()
            .map_err(|e| Attempt::Transient(format!("request failed: {e}")))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| Attempt::Transient(format!("reading response: {e}")))?;
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(Attempt::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(Attempt::Fatal(Error::Http(format!("status {status}"))));
        }
        parse_response(&text, &self.config.field_paths).map_err(Attempt::Fatal)
    }

    /// Scores one text, retrying transient failures with exponential backoff.
    pub fn score(&mut self, text: &str) -> Result<EmotionScores> {
        let body = serde_json::json!({ "text": text }).to_string();
        let mut delay = Duration::from_millis(self.config.backoff_base_ms);
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(scores) => return Ok(scores),
                Err(Attempt::Fatal(e)) => return Err(e),
                Err(Attempt::Transient(msg)) if attempt >= self.config.max_retries => {
                    return Err(Error::Http(format!(
                        "{msg} (after {} attempts)",
                        attempt + 1
                    )));
                }
                Err(Attempt::Transient(msg)) => {
                    log::debug!("transient failure ({msg}), retrying in {delay:?}");
                    sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
            }
        }
    }
}

fn lookup<'a>(value: &'a serde_json::Value, path: &str) -> Option<&'a serde_json::Value> {
    path.split('.').try_fold(value, |v, part| v.get(part))
}

/// Reads the five configured fields as reals in `[0, 1]`.
pub fn parse_response(body: &str, fields: &FieldPaths) -> Result<EmotionScores> {
    let value: serde_json::Value = serde_json::from_str(body)
        .map_err(|e| Error::Http(format!("malformed response body: {e}")))?;
    let mut out = [0.0; EMOTION_DIMS];
    for ((slot, path), name) in out.iter_mut().zip(fields.ordered()).zip(DIMENSION_NAMES) {
        let field = lookup(&value, path)
            .ok_or_else(|| Error::Http(format!("response lacks field {path:?} for {name}")))?;
        *slot = field
            .as_f64()
            .ok_or_else(|| Error::Http(format!("field {path:?} is not a number")))?;
    }
    EmotionScores::new(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchFailure {
    pub key: String,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct FetchReport {
    pub store: PrecomputedEmotionStore,
    pub fetched: usize,
    /// Keys already present in the store before this run.
    pub skipped: usize,
    pub failures: Vec<FetchFailure>,
    pub requests: usize,
}

/// `<out>.failed`
pub fn failure_sidecar(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".failed");
    PathBuf::from(name)
}

/// Fetches scores for every segment not yet present in the store at `out`.
///
/// The store is flushed periodically and at the end. Per-key failures do not
/// abort the run; they are returned and written to the sidecar file.
pub fn fetch_scores(segments: &[Segment], cfg: &EndpointConfig, out: &Path) -> Result<FetchReport> {
    let mut client = ScoreClient::new(cfg.clone())?;
    let mut store = if out.exists() {
        PrecomputedEmotionStore::load(out)?
    } else {
        PrecomputedEmotionStore::new()
    };
    let (mut fetched, mut skipped, mut since_flush) = (0, 0, 0);
    let mut failures = Vec::new();
    let mut seen = std::collections::BTreeSet::new();

    for seg in segments {
        let key = seg.key.to_string();
        if !seen.insert(key.clone()) {
            continue;
        }
        if store.contains(&key) {
            skipped += 1;
            continue;
        }
        match client.score(&seg.surface) {
            Ok(scores) => {
                store.insert(key, scores)?;
                fetched += 1;
                since_flush += 1;
                if cfg.flush_every > 0 && since_flush >= cfg.flush_every {
                    store.save(out)?;
                    since_flush = 0;
                }
            }
            Err(e) => {
                log::warn!("{key}: {e}");
                failures.push(FetchFailure {
                    key,
                    reason: e.to_string(),
                });
            }
        }
    }

    store.save(out)?;
    let sidecar = failure_sidecar(out);
    if failures.is_empty() {
        if sidecar.exists() {
            std::fs::remove_file(&sidecar).map_err(|e| Error::io(&sidecar, e))?;
        }
    } else {
        let keys: String = failures.iter().map(|f| format!("{}\n", f.key)).collect();
        write_text(&sidecar, &keys)?;
    }
    Ok(FetchReport {
        store,
        fetched,
        skipped,
        failures,
        requests: client.requests_sent(),
    })
}
