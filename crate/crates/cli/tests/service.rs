use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use fomet_cli::service::{router, AppState};

fn app() -> Router {
    router(Arc::new(AppState::new(None, None)))
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri).header("content-type", "application/json");
    let req = match body {
        Some(b) => req.body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

async fn fig5_session(app: &Router) -> String {
    let (status, body) = call(
        app,
        "POST",
        "/sessions",
        Some(json!({"pair_ref": "fig5", "k": 2, "mode": "c2", "threshold": 2, "duplicator": "strategy", "seed": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    body["id"].as_str().unwrap().to_owned()
}

#[tokio::test]
async fn corpus_lists_the_builtin_pairs() {
    let app = app();
    let (status, body) = call(&app, "GET", "/corpus", None).await;
    assert_eq!(status, StatusCode::OK);
    let names: Vec<&str> = body.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"fig5") && names.contains(&"c5000-c5001"));
}

#[tokio::test]
async fn fig5_session_starts_on_the_minima() {
    let app = app();
    let id = fig5_session(&app).await;
    let (status, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(state["pebbles"], json!({"p0x": 0, "p0y": 0, "p1x": 0, "p1y": 0}));
    assert_eq!(state["rounds_left"], 2);
    // Fixed orders leave no room for the constructed ones.
    assert_eq!(state["duplicator"], "optimal");
    assert!(state["fallback"].is_string());
}

#[tokio::test]
async fn out_of_range_moves_are_unprocessable() {
    let app = app();
    let id = fig5_session(&app).await;
    let (status, body) =
        call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({"structure": 0, "pebble": "x", "element": 5002}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(body["error"].as_str().unwrap().contains("out of range"));
    let (status, _) =
        call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({"structure": 2, "pebble": "x", "element": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/moves"),
        Some(json!({"structure": 0, "pebble": "x", "elements": [1, 2, 3]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn the_duplicator_survives_two_fig5_moves() {
    let app = app();
    let id = fig5_session(&app).await;
    let uri = format!("/sessions/{id}/moves");
    let (status, first) = call(&app, "POST", &uri, Some(json!({"structure": 1, "pebble": "y", "elements": [2500, 2501]}))).await;
    assert_eq!(status, StatusCode::OK, "{first}");
    assert_eq!(first["reply"].as_array().unwrap().len(), 2);
    assert!(first["winner"].is_null());
    let (status, second) =
        call(&app, "POST", &uri, Some(json!({"structure": 1, "pebble": "x", "element": 2502}))).await;
    assert_eq!(status, StatusCode::OK, "{second}");
    assert_eq!(second["winner"], "duplicator");
    assert_eq!(second["state"]["round"], 2);
    let (status, _) = call(&app, "POST", &uri, Some(json!({"structure": 0, "pebble": "x", "element": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn strategy_sessions_report_cases_and_invariants() {
    let app = app();
    let (status, body) =
        call(&app, "POST", "/sessions", Some(json!({"pair_ref": "c5000-c5001", "k": 1, "duplicator": "strategy"}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["state"]["duplicator"], "strategy");
    assert!(body["state"]["segments"]["names"].as_array().unwrap().len() == 14);
    let id = body["id"].as_str().unwrap();
    let preview_uri = format!("/sessions/{id}/preview");
    let mv = json!({"structure": 0, "pebble": "y", "element": 2500});
    let (status, preview) = call(&app, "POST", &preview_uri, Some(mv.clone())).await;
    assert_eq!(status, StatusCode::OK);
    let (_, state) = call(&app, "GET", &format!("/sessions/{id}"), None).await;
    assert_eq!(state["round"], 0);
    let (status, played) = call(&app, "POST", &format!("/sessions/{id}/moves"), Some(mv)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(played["reply"], preview);
    assert_eq!(played["invariants"], json!({"S": true, "E": true, "R": true}));
    assert!(played["state"]["last_case"].is_string());
    assert_eq!(played["winner"], "duplicator");
}

#[tokio::test]
async fn inline_structures_and_errors() {
    let app = app();
    let a = "sig { E/2 } dom 3 E: (0,1) (1,0)";
    let b = "sig { E/2 } dom 3 E: (1,2) (2,1)";
    let (status, body) = call(
        &app,
        "POST",
        "/sessions",
        Some(json!({"structures": [a, b], "k": 2, "duplicator": "optimal"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert!(body["state"]["fallback"].is_null());
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"structures": [a, "sig { E/2 } dom"], "k": 1}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"pair_ref": "nope", "k": 1}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, "POST", "/sessions", Some(json!({"k": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "GET", "/sessions/s999", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_are_logged_as_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(AppState::new(None, Some(dir.path().to_owned()))));
    let (_, body) = call(&app, "POST", "/sessions", Some(json!({"pair_ref": "set3-set4", "k": 1, "duplicator": "optimal"}))).await;
    let id = body["id"].as_str().unwrap();
    call(&app, "POST", &format!("/sessions/{id}/moves"), Some(json!({"structure": 1, "pebble": "x", "element": 3}))).await;
    let log = std::fs::read_to_string(dir.path().join(format!("{id}.jsonl"))).unwrap();
    let lines: Vec<Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["event"], "move");
}

#[tokio::test]
async fn corpus_directory_pairs_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.0.fms"), "sig { E/2 } dom 2").unwrap();
    std::fs::write(dir.path().join("tiny.1.fms"), "sig { E/2 } dom 3").unwrap();
    let app = router(Arc::new(AppState::new(Some(dir.path().to_owned()), None)));
    let (_, body) = call(&app, "GET", "/corpus", None).await;
    assert!(body.as_array().unwrap().iter().any(|e| e["name"] == "tiny" && e["sizes"] == json!([2, 3])));
}
