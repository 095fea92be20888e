use std::fs;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use zoolog_core::dataset::Dataset;
use zoolog_service::{router, Store};

const DETECTIONS: &str = r#"{"images":[
  {"id":"img1","width":640,"height":480,"path":"img1.png","detections":[
    {"class":"zebra","confidence":0.9,"bbox":[10,20,110,220]},
    {"class":"zebra","confidence":0.8,"bbox":[200,30,300,180]},
    {"class":"buffalo","confidence":0.7,"bbox":[5,5,50,60]},
    {"class":"tiger","confidence":0.1,"bbox":[1,1,2,2]}]},
  {"id":"img0","width":100,"height":100,"detections":[
    {"class":"tiger","confidence":0.95,"bbox":[1,1,20,20]}]}]}"#;

struct Fixture {
    _dir: tempfile::TempDir,
    config: std::path::PathBuf,
    store: Arc<Store>,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.json"), DETECTIONS).unwrap();
    fs::write(dir.path().join("img1.png"), b"not really a png").unwrap();
    let config = dir.path().join("zoolog.toml");
    fs::write(&config, "detections = \"d.json\"\n").unwrap();
    let store = Arc::new(Store::from_config(&config).unwrap());
    Fixture {
        _dir: dir,
        config,
        store,
    }
}

async fn call(store: &Arc<Store>, req: Request<Body>) -> (StatusCode, Option<String>, Vec<u8>) {
    let resp = router(store.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, ctype, body)
}

fn get(uri: &str) -> Request<Body> {
    Request::get(uri).body(Body::empty()).unwrap()
}

fn post(body: &str) -> Request<Body> {
    Request::post("/api/query")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap()
}

fn json(body: &[u8]) -> Value {
    serde_json::from_slice(body).unwrap()
}

#[tokio::test]
async fn lists_images_by_id() {
    let f = fixture();
    let (status, _, body) = call(&f.store, get("/api/images")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        String::from_utf8(body).unwrap(),
        r#"[{"classes":{"tiger":1},"height":100,"id":"img0","width":100},{"classes":{"buffalo":1,"zebra":2},"height":480,"id":"img1","width":640}]"#
    );
}

#[tokio::test]
async fn empty_store_lists_nothing() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.json"), "").unwrap();
    fs::write(dir.path().join("z.toml"), "detections = \"d.json\"").unwrap();
    let store = Arc::new(Store::new(Dataset::load(&dir.path().join("z.toml")).unwrap()));
    let (status, _, body) = call(&store, get("/api/images")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"[]");
}

#[tokio::test]
async fn image_bytes() {
    let f = fixture();
    let (status, ctype, body) = call(&f.store, get("/api/images/img1")).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype.as_deref(), Some("image/png"));
    assert_eq!(body, b"not really a png");
    assert_eq!(call(&f.store, get("/api/images/nope")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(call(&f.store, get("/api/images/img0")).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn answers_questions() {
    let f = fixture();
    let (status, _, body) = call(&f.store, post(r#"{"image_id":"img0","question":"How many tigers are there?"}"#)).await;
    assert_eq!(status, StatusCode::OK);
    let v = json(&body);
    assert_eq!(v["answer"]["task"], "counting");
    assert_eq!(v["answer"]["results"]["tiger"], 1);
    assert_eq!(v["query"]["task"], "counting");
    assert_eq!(v["query"]["entities"][0], "tiger");

    let lib = f.store.snapshot().ask("img1", "Count zebra and buffalo").unwrap().to_json();
    let (_, _, body) = call(&f.store, post(r#"{"image_id":"img1","question":"Count zebra and buffalo"}"#)).await;
    let body = String::from_utf8(body).unwrap();
    assert!(body.starts_with(&format!(r#"{{"answer":{lib},"query":"#)), "{body}");
}

#[tokio::test]
async fn error_statuses() {
    let f = fixture();
    let cases = [
        (r#"{"image_id":"nope","question":"How many tigers are there?"}"#, StatusCode::NOT_FOUND, "UnknownImage"),
        (r#"{"question":"what is the weather"}"#, StatusCode::UNPROCESSABLE_ENTITY, "UnclassifiableQuery"),
        (r#"{"image_id":"img1","question":"How many unicorns are there?"}"#, StatusCode::UNPROCESSABLE_ENTITY, "NoEntities"),
        (r#"{"image_id":"img1"}"#, StatusCode::BAD_REQUEST, "MalformedBody"),
        (r#"{"image_id":"img1","question":"#, StatusCode::BAD_REQUEST, "MalformedBody"),
        (r#"["question"]"#, StatusCode::BAD_REQUEST, "MalformedBody"),
        (r#"{"question":"How many tigers are there?"}"#, StatusCode::BAD_REQUEST, "MalformedBody"),
    ];
    for (req, status, code) in cases {
        let (got, _, body) = call(&f.store, post(req)).await;
        assert_eq!(got, status, "{req}");
        let v = json(&body);
        assert_eq!(v["code"], code, "{req}");
        assert!(v["message"].is_string() && v["question"].is_string());
    }
    let (_, _, body) = call(&f.store, post(r#"{"question":"what is the weather"}"#)).await;
    assert_eq!(json(&body)["question"], "what is the weather");
}

#[tokio::test]
async fn vocabulary_is_sorted_lexicon_labels() {
    let f = fixture();
    let (status, _, body) = call(&f.store, get("/api/vocabulary")).await;
    assert_eq!(status, StatusCode::OK);
    let labels: Vec<String> = serde_json::from_slice(&body).unwrap();
    let mut sorted = labels.clone();
    sorted.sort();
    assert_eq!(labels, sorted);
    let lexicon: Vec<String> = f.store.snapshot().parser().vocabulary().into_iter().collect();
    assert_eq!(labels, lexicon);
    assert!(labels.contains(&"zebra".to_string()));
}

#[tokio::test]
async fn repeated_requests_are_identical_and_reload_swaps() {
    let f = fixture();
    let q = r#"{"image_id":"img1","question":"Locate zebras in the image"}"#;
    let a = call(&f.store, post(q)).await.2;
    let b = call(&f.store, post(q)).await.2;
    assert_eq!(a, b);

    let dir = f.config.parent().unwrap();
    fs::write(
        dir.join("d.json"),
        r#"{"images":[{"id":"img1","width":640,"height":480,"detections":[]}]}"#,
    )
    .unwrap();
    f.store.reload().unwrap();
    let v = json(&call(&f.store, post(q)).await.2);
    assert_eq!(v["answer"]["results"]["zebra"], serde_json::json!([]));

    fs::write(dir.join("d.json"), "{ broken").unwrap();
    assert!(f.store.reload().is_err());
    let v = json(&call(&f.store, post(q)).await.2);
    assert_eq!(v["answer"]["results"]["zebra"], serde_json::json!([]));
}
