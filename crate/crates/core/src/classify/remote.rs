//! Client for a remote classification service.
//!
//! Wire contract: `POST /classify` with `{"text": "...", "tasks": ["sentiment", ...]}`,
//! answered by `{"results": {"sentiment": {"scores": {"negative": 0.1, ...}, "dominant": "positive"}}}`.
//! 4xx responses are protocol errors; 5xx, connection failures and timeouts
//! mean the service is unavailable.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::filter::{FilterItem, MessageClassifier, Source, Verdict};
use super::{Category, ClassScores, ClassifyError, Indicator};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);
pub const DEFAULT_MAX_IN_FLIGHT: usize = 8;

#[derive(Serialize)]
struct Request<'a> {
    text: &'a str,
    tasks: Vec<String>,
}

#[derive(Deserialize)]
struct Response {
    results: BTreeMap<String, WireScores>,
}

#[derive(Deserialize)]
struct WireScores {
    scores: BTreeMap<String, f64>,
    dominant: String,
}

fn classify_url(endpoint: &str) -> String {
    let e = endpoint.trim_end_matches('/');
    if e.ends_with("/classify") {
        e.to_string()
    } else {
        format!("{e}/classify")
    }
}

fn client(timeout: Duration) -> Result<reqwest::blocking::Client, ClassifyError> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .connect_timeout(timeout)
        .build()
        .map_err(|e| ClassifyError::RemoteUnavailable(e.to_string()))
}

/// Parses a `/classify` response body for the requested tasks.
pub fn parse_response(body: &str, tasks: &[Indicator]) -> Result<BTreeMap<Indicator, ClassScores>, ClassifyError> {
    let resp: Response =
        serde_json::from_str(body).map_err(|e| ClassifyError::ProtocolError(format!("malformed response: {e}")))?;
    let mut parsed = BTreeMap::new();
    for (name, wire) in &resp.results {
        let ind: Indicator = name.parse()?;
        parsed.insert(ind, ClassScores::from_map(ind, &wire.scores, Some(&wire.dominant))?);
    }
    let mut out = BTreeMap::new();
    for t in tasks {
        let s = parsed
            .remove(t)
            .ok_or_else(|| ClassifyError::ProtocolError(format!("response lacks {t}")))?;
        out.insert(*t, s);
    }
    Ok(out)
}

fn post(
    client: &reqwest::blocking::Client,
    url: &str,
    text: &str,
    tasks: &[Indicator],
) -> Result<BTreeMap<Indicator, ClassScores>, ClassifyError> {
    if tasks.is_empty() {
        return Err(ClassifyError::ProtocolError("no tasks requested".into()));
    }
    let req = Request {
        text,
        tasks: tasks.iter().map(ToString::to_string).collect(),
    };
    let resp = client
        .post(url)
        .json(&req)
        .send()
        .map_err(|e| ClassifyError::RemoteUnavailable(e.to_string()))?;
    let status = resp.status();
    if status.is_server_error() {
        return Err(ClassifyError::RemoteUnavailable(format!("{url} answered {status}")));
    }
    if status != reqwest::StatusCode::OK {
        return Err(ClassifyError::ProtocolError(format!("{url} answered {status}")));
    }
    let body = resp.text().map_err(|e| ClassifyError::RemoteUnavailable(e.to_string()))?;
    parse_response(&body, tasks)
}

/// Classifies one text remotely.
pub fn remote_classify(
    text: &str,
    tasks: &[Indicator],
    endpoint: &str,
    timeout: Duration,
) -> Result<BTreeMap<Indicator, ClassScores>, ClassifyError> {
    post(&client(timeout)?, &classify_url(endpoint), text, tasks)
}

const FILTER_TASKS: [Indicator; 4] = [
    Indicator::Sentiment,
    Indicator::Binary(Category::Disaster),
    Indicator::Binary(Category::Medical),
    Indicator::Binary(Category::Humanitarian),
];

/// Filtering through the remote service, with a bounded number of requests
/// in flight. Results are matched to messages by position, never by
/// completion order.
#[derive(Debug, Clone)]
pub struct RemoteClassifier {
    pub endpoint: String,
    pub timeout: Duration,
    pub max_in_flight: usize,
}

impl RemoteClassifier {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: DEFAULT_TIMEOUT,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
        }
    }

    fn verdict(client: &reqwest::blocking::Client, url: &str, text: &str) -> Result<Verdict, ClassifyError> {
        let r = post(client, url, text, &FILTER_TASKS)?;
        let relevant = |c| r[&Indicator::Binary(c)].dominant() == "relevant";
        Ok(Verdict {
            disaster: relevant(Category::Disaster),
            medical: relevant(Category::Medical),
            humanitarian: relevant(Category::Humanitarian),
            positive: r[&Indicator::Sentiment].dominant() == "positive",
        })
    }
}

impl MessageClassifier for RemoteClassifier {
    fn source(&self) -> Source {
        Source::Remote
    }

    fn verdicts(&self, items: &[FilterItem<'_>]) -> Result<Vec<Verdict>, ClassifyError> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let client = client(self.timeout)?;
        let url = classify_url(&self.endpoint);
        let next = AtomicUsize::new(0);
        let failed = AtomicBool::new(false);
        let results: Mutex<Vec<Option<Result<Verdict, ClassifyError>>>> =
            Mutex::new((0..items.len()).map(|_| None).collect());
        let workers = self.max_in_flight.clamp(1, items.len());
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    if failed.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= items.len() {
                        break;
                    }
                    let r = Self::verdict(&client, &url, items[i].text);
                    if r.is_err() {
                        failed.store(true, Ordering::Relaxed);
                    }
                    results.lock().unwrap()[i] = Some(r);
                });
            }
        });
        let results = results.into_inner().unwrap();
        // report the error of the earliest failing message
        if let Some(e) = results.iter().position(|r| matches!(r, Some(Err(_)))) {
            return Err(results.into_iter().nth(e).unwrap().unwrap().unwrap_err());
        }
        results
            .into_iter()
            .map(|r| r.ok_or_else(|| ClassifyError::RemoteUnavailable("request abandoned".into()))?)
            .collect()
    }
}

/// Remote classification that degrades to a local classifier when the
/// service is unreachable. Protocol errors are never masked.
pub struct WithFallback<R, L> {
    pub remote: R,
    pub local: L,
}

impl<R: MessageClassifier, L: MessageClassifier> WithFallback<R, L> {
    /// Returns the verdicts and the source that produced them.
    pub fn classify(&self, items: &[FilterItem<'_>]) -> Result<(Vec<Verdict>, Source), ClassifyError> {
        match self.remote.verdicts(items) {
            Ok(v) => Ok((v, self.remote.source())),
            Err(ClassifyError::RemoteUnavailable(why)) => {
                log::warn!("remote classifier unavailable ({why}); falling back to the local classifier");
                Ok((self.local.verdicts(items)?, self.local.source()))
            }
            Err(e) => Err(e),
        }
    }
}
