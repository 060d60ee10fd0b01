//! The clothing example through the HTTP API, in process, against a
//! throwaway store.
//!
//! To run the real server instead: `genrules serve --listen 127.0.0.1:8080 --store ./store`.

use axum::body::Body;
use axum::http::Request;
use axum::Router;
use genrules_service::{router, AppState, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: &str, uri: &str, body: String) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    println!("{method} {uri} -> {status}");
    value
}

#[tokio::main]
async fn main() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(AppState::new(Store::open(dir.path()).unwrap()));

    let db = call(&app, "POST", "/artifacts/transactions?name=clothing",
        "t-shirt slipper cap\nshort slipper cap\nsandal short cap\nsandal t-shirt cap\n\
         slipper t-shirt cap\ncap jacket\nt-shirt sandal\n".into()).await;
    let tax = call(&app, "POST", "/artifacts/taxonomy?name=light",
        "= clothes\nt-shirt\tlight clothes\nshort\tlight clothes\n\
         = shoes\nslipper\tlight shoes\nsandal\tlight shoes\n".into()).await;
    let mined = call(&app, "POST", "/mine",
        json!({"dataset_id": db["id"], "min_support": 0.25, "min_confidence": 0.6}).to_string()).await;
    println!("  {} rules", mined["rules"]);

    let run = call(&app, "POST", "/generalize", json!({
        "ruleset_id": mined["ruleset_id"], "taxonomyset_id": tax["id"], "dataset_id": db["id"], "side": "lhs"
    }).to_string()).await;
    let result = run["result_id"].as_str().unwrap().to_string();

    let export = call(&app, "GET", &format!("/results/{result}/export?measure=support&measure=confidence&sort=confidence"), String::new()).await;
    print!("{}", export.as_str().unwrap());

    let views = call(&app, "GET", &format!("/results/{result}/rules?item=sandal"), String::new()).await;
    for v in views.as_array().unwrap() {
        let key = v["key"].as_str().unwrap();
        println!("  {} links {}", key, v["links"]);
        if v["links"]["expanded"] == true {
            let e = call(&app, "GET", &format!("/results/{result}/rules/{key}/expanded"), String::new()).await;
            println!("  {e}");
        }
    }
}
