use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use genrules::formats::write_ruleset;
use genrules::miner::mine;
use genrules::model::{AssociationRule, MiningParams, RuleSet, TransactionDatabase};
use genrules_service::{router, AppState, Store};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

const CLOTHING: &str = "t-shirt slipper cap\nshort slipper cap\nsandal short cap\nsandal t-shirt cap\n\
                        slipper t-shirt cap\ncap jacket\nt-shirt sandal\n";
const TAXONOMIES: &str = "= clothes\nt-shirt\tlight clothes\nshort\tlight clothes\n\
                          = shoes\nslipper\tlight shoes\nsandal\tlight shoes\n";

fn app(dir: &tempfile::TempDir) -> Router {
    router(AppState::new(Store::open(dir.path()).unwrap()))
}

async fn call(app: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let resp = app.clone().oneshot(req.body(body.into()).unwrap()).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn call_json(app: &Router, method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("not JSON: {}", String::from_utf8_lossy(&bytes))))
}

async fn upload(app: &Router, kind: &str, body: &str) -> String {
    let (status, v) = call_json(app, "POST", &format!("/artifacts/{kind}?name=test"), body.to_string()).await;
    assert!(status.is_success(), "{status} {v}");
    v["id"].as_str().unwrap().to_string()
}

fn clothing_rules() -> String {
    write_ruleset(&RuleSet::from_rules([
        AssociationRule::parse(&["short", "slipper"], &["cap"]).unwrap(),
        AssociationRule::parse(&["sandal", "short"], &["cap"]).unwrap(),
        AssociationRule::parse(&["sandal", "t-shirt"], &["cap"]).unwrap(),
        AssociationRule::parse(&["slipper", "t-shirt"], &["cap"]).unwrap(),
    ]))
}

struct Clothing {
    dataset: String,
    rules: String,
    taxonomies: String,
    run: Value,
}

async fn clothing(app: &Router) -> Clothing {
    let dataset = upload(app, "transactions", CLOTHING).await;
    let rules = upload(app, "ruleset", &clothing_rules()).await;
    let taxonomies = upload(app, "taxonomy", TAXONOMIES).await;
    let req = json!({"ruleset_id": rules, "taxonomyset_id": taxonomies, "dataset_id": dataset, "side": "lhs"});
    let (status, run) = call_json(app, "POST", "/generalize", req.to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{run}");
    Clothing { dataset, rules, taxonomies, run }
}

#[tokio::test]
async fn health() {
    let dir = tempfile::tempdir().unwrap();
    let (status, v) = call_json(&app(&dir), "GET", "/health", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(v["status"], "ok");
}

#[tokio::test]
async fn uploads_are_content_addressed() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let (status, first) = call_json(&app, "POST", "/artifacts/transactions?name=clothing", CLOTHING).await;
    assert_eq!(status, StatusCode::CREATED);
    let id = first["id"].as_str().unwrap();
    assert_eq!(first["kind"], "transactions");

    let (status, again) = call_json(&app, "POST", "/artifacts/transactions?name=other", CLOTHING).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(again["id"], id);
    assert_eq!(again["name"], "clothing");

    let (status, raw) = call(&app, "GET", &format!("/artifacts/{id}/raw"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(raw, CLOTHING.as_bytes());
    let (_, meta) = call_json(&app, "GET", &format!("/artifacts/{id}"), Body::empty()).await;
    assert_eq!(meta["payload"], CLOTHING);

    let (status, _) = call(&app, "GET", "/artifacts/0123456789abcdef0123456789abcdef/raw", Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bad_uploads_are_rejected_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let (status, v) = call_json(&app, "POST", "/artifacts/taxonomy", "a\tb\nb\ta\n").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["message"].as_str().unwrap().contains("cycle"), "{v}");

    let (status, v) = call_json(&app, "POST", "/artifacts/taxonomy", "a\tb\nno tab here\n").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["line"], 2);

    let (status, _) = call_json(&app, "POST", "/artifacts/ruleset", "{\"rules\": 3}").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "POST", "/artifacts/pictures", "x").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn mining_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let dataset = upload(&app, "transactions", CLOTHING).await;
    let (status, v) = call_json(&app, "POST", "/mine", json!({"dataset_id": dataset}).to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{v}");

    let db = genrules::formats::parse_transactions(CLOTHING).unwrap().value;
    let expected = mine(&db, &MiningParams::default()).unwrap();
    assert_eq!(v["rules"], expected.len());
    let (_, raw) = call(&app, "GET", &format!("/artifacts/{}/raw", v["ruleset_id"].as_str().unwrap()), Body::empty()).await;
    assert_eq!(String::from_utf8(raw).unwrap(), write_ruleset(&expected));

    let (status, v) =
        call_json(&app, "POST", "/mine", json!({"dataset_id": dataset, "min_support": 1.0}).to_string()).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(v["rules"], 0);

    let (status, _) = call_json(&app, "POST", "/mine", json!({"dataset_id": "f".repeat(32)}).to_string()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let empty = upload(&app, "transactions", "# nothing\n").await;
    let (status, _) = call_json(&app, "POST", "/mine", json!({"dataset_id": empty}).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn clothing_example_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let f = clothing(&app).await;
    assert_eq!(f.run["status"], "done");
    let result = f.run["result_id"].as_str().unwrap();

    let (status, views) = call_json(&app, "GET", &format!("/results/{result}/rules?measure=support&measure=confidence"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let views = views.as_array().unwrap();
    assert_eq!(views.len(), 1);
    let view = &views[0];
    assert_eq!(view["rule"]["lhs"], json!(["light clothes", "light shoes"]));
    assert_eq!(view["links"], json!({"expanded": true, "sources": true, "measures_drilldown": false}));
    assert_eq!(view["measures"]["support"], 5.0 / 7.0);
    let key = view["key"].as_str().unwrap();

    let (_, expanded) = call_json(&app, "GET", &format!("/results/{result}/rules/{key}/expanded"), Body::empty()).await;
    assert_eq!(expanded.as_array().unwrap().len(), 4);
    let (_, sources) = call_json(&app, "GET", &format!("/results/{result}/rules/{key}/sources"), Body::empty()).await;
    assert_eq!(sources.as_array().unwrap().len(), 4);
    // no mining thresholds on an uploaded rule list, so nothing to flag
    let (status, _) = call_json(&app, "GET", &format!("/results/{result}/rules/{key}/measures"), Body::empty()).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call_json(&app, "GET", &format!("/results/{result}/rules/nope/sources"), Body::empty()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    // descendant-aware item search and predicates
    let (_, hits) = call_json(&app, "GET", &format!("/results/{result}/rules?item=t-shirt&where=support%3E%3D0.5"), Body::empty()).await;
    assert_eq!(hits.as_array().unwrap().len(), 1);
    let (_, hits) = call_json(&app, "GET", &format!("/results/{result}/rules?item=t-shirt&exact=true"), Body::empty()).await;
    assert!(hits.as_array().unwrap().is_empty());

    let (status, v) = call_json(&app, "GET", &format!("/results/{result}/rules?measure=Sup"), Body::empty()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(v["message"].as_str().unwrap().contains("support, confidence"));

    let (status, text) = call(&app, "GET", &format!("/results/{result}/export?measure=support"), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(String::from_utf8(text).unwrap(), "rule\tsupport\n(light clothes) & (light shoes) ⇒ cap\t0.7143\n");
}

#[tokio::test]
async fn completed_run_has_four_downloads() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let f = clothing(&app).await;
    let (_, run) = call_json(&app, "GET", &format!("/runs/{}", f.run["id"].as_str().unwrap()), Body::empty()).await;
    assert_eq!(run, f.run);
    assert_eq!(run["dataset_id"], f.dataset.as_str());
    assert_eq!(run["ruleset_id"], f.rules.as_str());
    assert_eq!(run["taxonomyset_id"], f.taxonomies.as_str());
    for (field, kind) in [
        ("dataset_id", "transactions"),
        ("ruleset_id", "ruleset"),
        ("taxonomyset_id", "taxonomy"),
        ("result_id", "generalized-ruleset"),
    ] {
        let id = run[field].as_str().unwrap();
        let (status, meta) = call_json(&app, "GET", &format!("/artifacts/{id}"), Body::empty()).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(meta["kind"], kind);
        let (status, raw) = call(&app, "GET", &format!("/artifacts/{id}/raw"), Body::empty()).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(raw, meta["payload"].as_str().unwrap().as_bytes());
    }
}

#[tokio::test]
async fn generalization_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let rules = upload(&app, "ruleset", &clothing_rules()).await;
    let empty_tax = upload(&app, "taxonomy", "").await;
    let (status, run) = call_json(&app, "POST", "/generalize", json!({"ruleset_id": rules, "taxonomyset_id": empty_tax}).to_string()).await;
    assert_eq!(status, StatusCode::CREATED, "{run}");
    assert!(run["warnings"].as_array().unwrap().len() == 1, "{run}");
    let (_, views) = call_json(&app, "GET", &format!("/results/{}/rules", run["result_id"].as_str().unwrap()), Body::empty()).await;
    let views = views.as_array().unwrap();
    assert_eq!(views.len(), 4);
    assert!(views.iter().all(|v| v["links"]["expanded"] == false && v["rule"]["sources"].as_array().unwrap().len() == 1));

    let (status, _) = call_json(&app, "POST", "/generalize", json!({"ruleset_id": rules, "taxonomyset_id": "a".repeat(32)}).to_string()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call_json(&app, "POST", "/generalize", json!({"ruleset_id": empty_tax, "taxonomyset_id": empty_tax}).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call_json(&app, "POST", "/generalize", json!({"ruleset_id": rules, "taxonomyset_id": empty_tax, "side": "middle"}).to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call_json(&app, "POST", "/generalize", json!({"ruleset_id": rules, "taxonomyset_id": empty_tax, "options": {"max_level": 0}}).to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn asynchronous_runs_complete() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let rules = upload(&app, "ruleset", &clothing_rules()).await;
    let tax = upload(&app, "taxonomy", TAXONOMIES).await;
    let req = json!({"ruleset_id": rules, "taxonomyset_id": tax, "async": true});
    let (status, run) = call_json(&app, "POST", "/generalize", req.to_string()).await;
    assert_eq!(status, StatusCode::ACCEPTED);
    assert_eq!(run["status"], "pending");
    assert!(run["result_id"].is_null());
    let uri = format!("/runs/{}", run["id"].as_str().unwrap());
    let mut done = run;
    for _ in 0..200 {
        done = call_json(&app, "GET", &uri, Body::empty()).await.1;
        if done["status"] != "pending" {
            break;
        }
        tokio::time::sleep(std::time::Duration::from_millis(10)).await;
    }
    assert_eq!(done["status"], "done");
    assert!(done["result_id"].is_string());
}

#[tokio::test]
async fn artifacts_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (run, result_raw) = {
        let app = app(&dir);
        let f = clothing(&app).await;
        let result = f.run["result_id"].as_str().unwrap().to_string();
        let raw = call(&app, "GET", &format!("/artifacts/{result}/raw"), Body::empty()).await.1;
        (f.run, raw)
    };
    let app = router(Arc::clone(&AppState::new(Store::open(dir.path()).unwrap())));
    let (_, again) = call_json(&app, "GET", &format!("/runs/{}", run["id"].as_str().unwrap()), Body::empty()).await;
    assert_eq!(again, run);
    let raw = call(&app, "GET", &format!("/artifacts/{}/raw", run["result_id"].as_str().unwrap()), Body::empty()).await.1;
    assert_eq!(raw, result_raw);
}

#[tokio::test]
async fn measures_link_follows_the_mining_thresholds() {
    // a and b always come with x, their sibling c never does
    let dir = tempfile::tempdir().unwrap();
    let app = app(&dir);
    let db = TransactionDatabase::from_strs(&[&["a", "x"], &["b", "x"], &["c"], &["c"], &["c"], &["c"]]).unwrap();
    let dataset = upload(&app, "transactions", &genrules::formats::write_transactions(&db).unwrap()).await;
    let (_, mined) = call_json(&app, "POST", "/mine", json!({"dataset_id": dataset, "min_support": 0.1, "min_confidence": 0.5}).to_string()).await;
    let tax = upload(&app, "taxonomy", "a\tg\nb\tg\nc\tg\n").await;
    let req = json!({"ruleset_id": mined["ruleset_id"], "taxonomyset_id": tax, "dataset_id": dataset});
    let (_, run) = call_json(&app, "POST", "/generalize", req.to_string()).await;
    let result = run["result_id"].as_str().unwrap();
    let (_, views) = call_json(&app, "GET", &format!("/results/{result}/rules?rhs_item=x&exact=1"), Body::empty()).await;
    let g = views.as_array().unwrap().iter().find(|v| v["rule"]["lhs"] == json!(["g"])).unwrap();
    assert_eq!(g["links"]["measures_drilldown"], true);
    assert_eq!(g["flags"]["below_min_confidence"], true);
    let (status, m) = call_json(&app, "GET", &format!("/results/{result}/rules/{}/measures", g["key"].as_str().unwrap()), Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(m["measures"]["confidence"], 1.0 / 3.0);
    assert_eq!(m["mining_params"]["min_confidence"], 0.5);
}
