//! The `/classify` wire contract, exercised against an in-process HTTP
//! service and checked against the shared schema in `schema/`.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use crisis_pulse::classify::remote::{parse_response, WithFallback};
use crisis_pulse::classify::{
    remote_classify, BaselineClassifier, ClassifyError, FilterItem, Indicator, MessageClassifier, RemoteClassifier,
    Source,
};
use crisis_pulse::text::{preprocess_document, RawMessage, Stopwords, TokenizedDoc};

fn schema() -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/classify.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn validator(def: &str) -> jsonschema::Validator {
    let mut s = schema();
    let obj = s.as_object_mut().unwrap();
    obj.insert("$ref".into(), json!(format!("#/$defs/{def}")));
    jsonschema::validator_for(&s).unwrap()
}

fn def_key(ind: Indicator) -> String {
    ind.to_string().replace(':', "_")
}

#[test]
fn schema_label_sets_match_code() {
    let s = schema();
    let tasks: Vec<String> = serde_json::from_value(s["$defs"]["request"]["properties"]["tasks"]["items"]["enum"].clone()).unwrap();
    let code: Vec<String> = Indicator::ALL.iter().map(ToString::to_string).collect();
    assert_eq!(tasks, code);
    let task_defs = s["$defs"]["task"].as_object().unwrap();
    assert_eq!(task_defs.len(), Indicator::ALL.len());
    for ind in Indicator::ALL {
        let d = &task_defs[&def_key(ind)];
        let want: Vec<&str> = ind.labels().to_vec();
        let dominant: Vec<String> = serde_json::from_value(d["properties"]["dominant"]["enum"].clone()).unwrap();
        let required: Vec<String> = serde_json::from_value(d["properties"]["scores"]["required"].clone()).unwrap();
        let props: BTreeSet<&String> = d["properties"]["scores"]["properties"].as_object().unwrap().keys().collect();
        assert_eq!(dominant, want, "{ind}");
        assert_eq!(required, want, "{ind}");
        assert_eq!(props.into_iter().cloned().collect::<Vec<_>>(), want, "{ind}");
    }
}

#[test]
fn schema_rejects_off_contract_bodies() {
    let req = validator("request");
    assert!(req.is_valid(&json!({"text": "flood", "tasks": ["sentiment"]})));
    assert!(!req.is_valid(&json!({"tasks": ["sentiment"]})));
    assert!(!req.is_valid(&json!({"text": "x", "tasks": ["mood"]})));
    let resp = validator("response");
    let ok = json!({"results": {"sarcasm": {"scores": {"non_sarcastic": 0.7, "sarcastic": 0.3}, "dominant": "non_sarcastic"}}});
    assert!(resp.is_valid(&ok));
    let missing = json!({"results": {"sarcasm": {"scores": {"sarcastic": 1.0}, "dominant": "sarcastic"}}});
    assert!(!resp.is_valid(&missing));
    let foreign = json!({"results": {"sarcasm": {"scores": {"non_sarcastic": 0.5, "sarcastic": 0.5}, "dominant": "ironic"}}});
    assert!(!resp.is_valid(&foreign));
}

type Handler = dyn Fn(&Value) -> (u16, String) + Send + Sync;

/// Serves HTTP/1.1 on a loopback port, one request per connection. Every
/// request body is recorded.
struct Mock {
    url: String,
    requests: Arc<Mutex<Vec<Value>>>,
}

fn serve(handler: Arc<Handler>) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let requests = Arc::new(Mutex::new(Vec::new()));
    let log = requests.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { continue };
            let handler = handler.clone();
            let log = log.clone();
            thread::spawn(move || {
                let mut r = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                let mut line = String::new();
                r.read_line(&mut line).unwrap();
                assert!(line.starts_with("POST /classify "), "unexpected request line {line:?}");
                loop {
                    line.clear();
                    r.read_line(&mut line).unwrap();
                    if line.trim().is_empty() {
                        break;
                    }
                    if let Some((k, v)) = line.split_once(':') {
                        if k.eq_ignore_ascii_case("content-length") {
                            len = v.trim().parse().unwrap();
                        }
                    }
                }
                let mut body = vec![0; len];
                r.read_exact(&mut body).unwrap();
                let req: Value = serde_json::from_slice(&body).unwrap();
                let (status, body) = handler(&req);
                log.lock().unwrap().push(req);
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            });
        }
    });
    Mock { url, requests }
}

/// A keyword "model": relevant when the text mentions a flood, positive
/// when it says thanks. Scores for the other labels share the remainder.
fn answer(req: &Value) -> Value {
    let text = req["text"].as_str().unwrap().to_lowercase();
    let mut results = serde_json::Map::new();
    for t in req["tasks"].as_array().unwrap() {
        let ind: Indicator = t.as_str().unwrap().parse().unwrap();
        let labels = ind.labels();
        let pick = match ind {
            Indicator::Sentiment if text.contains("thanks") => "positive",
            Indicator::Binary(_) if text.contains("flood") => "relevant",
            Indicator::Binary(_) => "irrelevant",
            _ => labels[0],
        };
        let rest = 0.2 / (labels.len() - 1) as f64;
        let scores: serde_json::Map<String, Value> =
            labels.iter().map(|l| (l.to_string(), json!(if *l == pick { 0.8 } else { rest }))).collect();
        results.insert(t.as_str().unwrap().into(), json!({"scores": scores, "dominant": pick}));
    }
    json!({ "results": results })
}

fn contract_mock() -> Mock {
    let resp = validator("response");
    serve(Arc::new(move |req: &Value| {
        let body = answer(req);
        assert!(resp.is_valid(&body));
        (200, body.to_string())
    }))
}

fn fixed(status: u16, body: &'static str) -> Mock {
    serve(Arc::new(move |_: &Value| (status, body.to_string())))
}

fn docs(texts: &[&str]) -> (Vec<RawMessage>, Vec<TokenizedDoc>) {
    let msgs: Vec<RawMessage> = texts
        .iter()
        .enumerate()
        .map(|(i, t)| RawMessage {
            id: format!("m{i}"),
            timestamp: chrono::DateTime::from_timestamp(1_600_000_000 + i as i64, 0).unwrap(),
            author: "someone".into(),
            text: t.to_string(),
            is_retweet: false,
        })
        .collect();
    let docs = msgs.iter().map(|m| preprocess_document(m, &Stopwords::english())).collect();
    (msgs, docs)
}

fn items<'a>(msgs: &'a [RawMessage], docs: &'a [TokenizedDoc]) -> Vec<FilterItem<'a>> {
    msgs.iter().zip(docs).map(|(m, d)| FilterItem { id: &m.id, text: &m.text, doc: d }).collect()
}

#[test]
fn requests_and_responses_follow_schema() {
    let mock = contract_mock();
    let tasks = Indicator::ALL;
    let out = remote_classify("Flood water rising, thanks to the crews", &tasks, &mock.url, Duration::from_secs(5)).unwrap();
    assert_eq!(out.len(), tasks.len());
    assert_eq!(out[&Indicator::Sentiment].dominant(), "positive");
    for ind in tasks {
        let total: f64 = out[&ind].iter().map(|(_, s)| s).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
    let req = validator("request");
    for r in mock.requests.lock().unwrap().iter() {
        assert!(req.is_valid(r), "request off contract: {r}");
    }
}

#[test]
fn verdicts_keep_message_order_under_concurrency() {
    let mock = contract_mock();
    let texts: Vec<String> =
        (0..60).map(|i| if i % 3 == 0 { format!("flood report {i}") } else { format!("quiet day {i}, thanks") }).collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let (msgs, docs) = docs(&refs);
    let c = RemoteClassifier { max_in_flight: 8, ..RemoteClassifier::new(mock.url.clone()) };
    let v = c.verdicts(&items(&msgs, &docs)).unwrap();
    assert_eq!(v.len(), 60);
    for (i, v) in v.iter().enumerate() {
        assert_eq!(v.disaster, i % 3 == 0, "message {i}");
        assert_eq!(v.positive, i % 3 != 0, "message {i}");
    }
    assert_eq!(mock.requests.lock().unwrap().len(), 60);
}

#[test]
fn status_codes_map_to_error_kinds() {
    let t = Duration::from_secs(5);
    let bad_request = fixed(400, r#"{"error":"no text"}"#);
    assert!(matches!(remote_classify("x", &[Indicator::Sentiment], &bad_request.url, t), Err(ClassifyError::ProtocolError(_))));
    let down = fixed(503, r#"{"error":"loading"}"#);
    assert!(matches!(remote_classify("x", &[Indicator::Sentiment], &down.url, t), Err(ClassifyError::RemoteUnavailable(_))));
    let garbage = fixed(200, "not json");
    assert!(matches!(remote_classify("x", &[Indicator::Sentiment], &garbage.url, t), Err(ClassifyError::ProtocolError(_))));
}

#[test]
fn malformed_scores_are_protocol_errors() {
    let s = [Indicator::Sentiment];
    let short = r#"{"results":{"sentiment":{"scores":{"negative":0.5,"positive":0.5},"dominant":"positive"}}}"#;
    let unnormalized = r#"{"results":{"sentiment":{"scores":{"negative":0.5,"neutral":0.5,"positive":0.5},"dominant":"positive"}}}"#;
    let foreign = r#"{"results":{"sentiment":{"scores":{"negative":0.2,"neutral":0.2,"positive":0.6},"dominant":"ecstatic"}}}"#;
    let absent = r#"{"results":{}}"#;
    for body in [short, unnormalized, foreign, absent] {
        assert!(matches!(parse_response(body, &s), Err(ClassifyError::ProtocolError(_))), "{body}");
    }
    let ok = r#"{"results":{"sentiment":{"scores":{"negative":0.2,"neutral":0.2,"positive":0.6},"dominant":"positive"}}}"#;
    assert_eq!(parse_response(ok, &s).unwrap()[&Indicator::Sentiment].dominant(), "positive");
}

#[test]
fn fallback_only_masks_unavailability() {
    let (msgs, docs) = docs(&["flood warning for the river", "lovely sunny day"]);
    let it = items(&msgs, &docs);
    let local = BaselineClassifier::default();
    let expected = local.verdicts(&it).unwrap();

    let down = fixed(502, "");
    let fb = WithFallback { remote: RemoteClassifier::new(down.url.clone()), local: local.clone() };
    let (v, source) = fb.classify(&it).unwrap();
    assert_eq!(source, Source::Baseline);
    assert_eq!(v, expected);

    let refused = WithFallback { remote: RemoteClassifier::new("http://127.0.0.1:9"), local: local.clone() };
    assert_eq!(refused.classify(&it).unwrap().1, Source::Baseline);

    let rejecting = fixed(422, "");
    let fb = WithFallback { remote: RemoteClassifier::new(rejecting.url.clone()), local };
    assert!(matches!(fb.classify(&it), Err(ClassifyError::ProtocolError(_))));

    let up = contract_mock();
    let fb = WithFallback { remote: RemoteClassifier::new(up.url.clone()), local: BaselineClassifier::default() };
    let (v, source) = fb.classify(&it).unwrap();
    assert_eq!(source, Source::Remote);
    assert!(v[0].disaster && !v[1].disaster);
}

// The only test in this binary that touches the environment.
#[test]
fn env_var_redirects_pipeline_classifier() {
    use crisis_pulse::pipeline::{run_pipeline, ClassifierMode, PipelineConfig, REMOTE_ENV};

    let mock = contract_mock();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline");
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = PipelineConfig::load(dir.join("pipeline.conf")).unwrap();
    cfg.out = tmp.path().to_path_buf();
    cfg.lda_enabled = false;
    cfg.classifier = ClassifierMode::Remote { url: "http://127.0.0.1:9".into(), fallback: false };
    std::env::set_var(REMOTE_ENV, &mock.url);
    let r = run_pipeline(&cfg);
    std::env::remove_var(REMOTE_ENV);
    let r = r.unwrap();
    assert_eq!(r.classifier, Source::Remote);
    assert_eq!(mock.requests.lock().unwrap().len(), 200);
    let floods = std::fs::read_to_string(dir.join("messages.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| serde_json::from_str::<Value>(l).unwrap()["text"].as_str().unwrap().to_lowercase().contains("flood"))
        .count();
    assert_eq!(r.categories[0].messages, floods as u64);
}
