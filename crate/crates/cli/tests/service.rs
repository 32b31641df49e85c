use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use morphbpe::{inspect::inspect_text, MergeEvent, Mode, Normalization, TokenizerModel};
use morphbpe_cli::service::{load_models, router, Models};
use serde_json::{json, Value};
use tower::ServiceExt;

fn model(mode: Mode) -> TokenizerModel {
    let vocab = ["<unk>", "a", "b", "c", "ab", "abc"].map(String::from).to_vec();
    let merges = vec![MergeEvent::new("a", "b", 0, 3), MergeEvent::new("ab", "c", 1, 2)];
    TokenizerModel::new(vocab, merges, mode, Normalization::Nfc).unwrap()
}

fn models() -> Models {
    let mut m = Models::new();
    m.insert("bpe".into(), model(Mode::VanillaBpe));
    m.insert(
        "small".into(),
        model(Mode::MorphBpe).truncated(5).unwrap().with_language("xx"),
    );
    m
}

async fn call(method: &str, uri: &str, body: Option<&str>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(|b| Body::from(b.to_owned())).unwrap_or_else(Body::empty))
        .unwrap();
    let res = router(models()).oneshot(req).await.unwrap();
    let status = res.status();
    assert_eq!(res.headers()["access-control-allow-origin"], "*");
    let bytes = res.into_body().collect().await.unwrap().to_bytes();
    let v = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, v)
}

#[tokio::test]
async fn lists_models() {
    let (s, v) = call("GET", "/models", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(
        v,
        json!([
            {"id": "bpe", "mode": "vanilla-bpe", "vocab_size": 6, "language": null},
            {"id": "small", "mode": "morph-bpe", "vocab_size": 5, "language": "xx"},
        ])
    );
}

#[tokio::test]
async fn tokenize_matches_library() {
    let body = json!({"model_id": "bpe", "text": "abc cab", "gold_segmentation": [["a", "bc"], ["c", "ab"]], "alignment": true});
    let (s, v) = call("POST", "/tokenize", Some(&body.to_string())).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let gold = vec![
        vec!["a".to_owned(), "bc".to_owned()],
        vec!["c".to_owned(), "ab".to_owned()],
    ];
    let want = inspect_text(&model(Mode::VanillaBpe), "abc cab", Some(&gold), true).unwrap();
    assert_eq!(v["words"], serde_json::to_value(&want).unwrap());
    assert_eq!(v["words"][0]["boundary_violations"], json!([true]));
    assert_eq!(v["words"][1]["offsets"], json!([[4, 5], [5, 7]]));
    assert_eq!(v["mean_mu_e"], json!(1.0));
    assert_eq!(v["vocab_size"], json!(6));
}

#[tokio::test]
async fn tokenize_without_gold_has_no_scores() {
    let (s, v) = call("POST", "/tokenize", Some(r#"{"model_id":"small","text":"abc"}"#)).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["words"][0]["tokens"], json!(["ab", "c"]));
    assert!(v["words"][0].get("mu_e").is_none());
    assert!(v.get("mean_mu_e").is_none());
}

#[tokio::test]
async fn compare_returns_one_result_per_model() {
    let body = json!({"model_ids": ["bpe", "small"], "text": "abc", "gold_segmentation": [["ab", "c"]]});
    let (s, v) = call("POST", "/compare", Some(&body.to_string())).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    let r = v["results"].as_array().unwrap();
    assert_eq!(r.len(), 2);
    assert_eq!(r[0]["words"][0]["mu_e"], json!(2));
    assert_eq!(r[1]["words"][0]["mu_e"], json!(0));
    assert!(r[1]["words"][0]["alignment"].is_array());
}

#[tokio::test]
async fn errors_are_json() {
    let (s, v) = call("POST", "/tokenize", Some(r#"{"model_id":"nope","text":"a"}"#)).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].as_str().unwrap().contains("nope"));

    let (s, v) = call("POST", "/tokenize", Some("{not json")).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].is_string());

    let (s, _) = call("POST", "/tokenize", Some(r#"{"text":"a"}"#)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let mismatch = json!({"model_id": "bpe", "text": "a b", "gold_segmentation": [["a"]]});
    let (s, v) = call("POST", "/tokenize", Some(&mismatch.to_string())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert!(v["error"].as_str().unwrap().contains("gold"));

    let (s, _) = call("POST", "/compare", Some(r#"{"model_ids":[],"text":"a"}"#)).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);

    let (s, v) = call("GET", "/nowhere", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert!(v["error"].is_string());
}

#[tokio::test]
async fn bad_gold_warns_instead_of_failing() {
    let body = json!({"model_id": "bpe", "text": "abc", "gold_segmentation": [["x", "y"]]});
    let (s, v) = call("POST", "/tokenize", Some(&body.to_string())).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["words"][0]["warning"].is_string());
    assert!(v.get("mean_mu_e").is_none());
}

#[tokio::test]
async fn preflight() {
    let (s, v) = call("OPTIONS", "/tokenize", None).await;
    assert_eq!(s, StatusCode::NO_CONTENT);
    assert_eq!(v, Value::Null);
}

#[test]
fn loads_model_directory() {
    let dir = std::env::temp_dir().join(format!("morphbpe-svc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("one.json"), model(Mode::MorphBpe).to_json()).unwrap();
    std::fs::write(dir.join("notes.txt"), "ignored").unwrap();
    let m = load_models(&dir).unwrap();
    assert_eq!(m.keys().collect::<Vec<_>>(), ["one"]);
    std::fs::write(dir.join("broken.json"), "{").unwrap();
    assert!(load_models(&dir).is_err());
}
