use std::sync::Arc;
use std::time::Duration;

use archrecon_cli::server::{router, AppState};
use archrecon_core::harness::{make_synthetic_system, SyntheticSpec};
use archrecon_core::{ModelDocument, RunConfig, RunDefinition, ScenarioId, Store};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn definition(seed: u64) -> RunDefinition {
    let sys = make_synthetic_system(&SyntheticSpec::new(30, 6, 4, 0.1, 7)).unwrap();
    RunDefinition {
        system: "sys".into(),
        graph: sys.graph.to_document(),
        model: ModelDocument::from_model(&sys.model, &[]),
        config: RunConfig {
            seed,
            population: 10,
            max_evaluations: 200,
            snapshot_interval: 50,
            scenario: ScenarioId::Strict4,
            ..RunConfig::default()
        },
    }
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => request.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::Null) };
    (status, value)
}

async fn wait_done(app: &Router, id: &str) -> Value {
    for _ in 0..600 {
        let (status, record) = call(app, "GET", &format!("/runs/{id}"), None).await;
        assert_eq!(status, StatusCode::OK);
        match record["status"].as_str().unwrap() {
            "done" => return record,
            "failed" => panic!("run failed: {record}"),
            _ => tokio::time::sleep(Duration::from_millis(50)).await,
        }
    }
    panic!("run {id} did not finish");
}

fn app() -> (tempfile::TempDir, Router) {
    let dir = tempfile::tempdir().unwrap();
    let state: Arc<AppState> = AppState::new(Store::open(dir.path()).unwrap(), 2);
    (dir, router(state))
}

async fn completed_run(app: &Router, seed: u64) -> String {
    let (status, record) = call(app, "POST", "/runs", Some(serde_json::to_value(definition(seed)).unwrap())).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{record}");
    let id = record["id"].as_str().unwrap().to_string();
    wait_done(app, &id).await;
    id
}

#[tokio::test(flavor = "multi_thread")]
async fn run_lifecycle() {
    let (_dir, app) = app();
    let id = completed_run(&app, 1).await;

    // resubmitting a finished run is a no-op
    let (status, record) = call(&app, "POST", "/runs", Some(serde_json::to_value(definition(1)).unwrap())).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(record["status"], "done");
    assert_eq!(record["latest_eval_count"], 200);

    let (_, runs) = call(&app, "GET", "/runs", None).await;
    assert_eq!(runs.as_array().unwrap().len(), 1);

    let (_, snapshots) = call(&app, "GET", &format!("/runs/{id}/snapshots"), None).await;
    let evals: Vec<u64> = snapshots.as_array().unwrap().iter().map(|s| s["evals"].as_u64().unwrap()).collect();
    assert_eq!(evals, [50, 100, 150, 200]);
    let (_, later) = call(&app, "GET", &format!("/runs/{id}/snapshots?from=150"), None).await;
    assert_eq!(later.as_array().unwrap().len(), 2);
    assert!(later[0]["archive"].is_array() && later[0]["pop"].is_array());

    let (_, front) = call(&app, "GET", &format!("/runs/{id}/front"), None).await;
    let front = front.as_array().unwrap().clone();
    assert!(!front.is_empty());
    for member in &front {
        let r = member["ref"].as_str().unwrap();
        let (status, detail) = call(&app, "GET", &format!("/solutions/{r}"), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(detail["objectives"], member["objectives"]);
        assert_eq!(detail["violations"].as_array().unwrap().len() as f64, detail["objectives"][5].as_f64().unwrap());
    }

    // reads are pure
    let (_, again) = call(&app, "GET", &format!("/runs/{id}/front"), None).await;
    assert_eq!(again.as_array().unwrap(), &front);
}

#[tokio::test(flavor = "multi_thread")]
async fn filtering() {
    let (_dir, app) = app();
    let id = completed_run(&app, 2).await;
    let (_, front) = call(&app, "GET", &format!("/runs/{id}/front"), None).await;
    let front = front.as_array().unwrap();

    let (status, all) = call(&app, "POST", &format!("/runs/{id}/filter"), Some(json!({}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(all.as_array().unwrap(), front);

    let cap = front.iter().map(|m| m["objectives"][5].as_f64().unwrap()).fold(f64::INFINITY, f64::min);
    let query = json!({"bounds": {"violations": {"upper": cap}}});
    let (_, some) = call(&app, "POST", &format!("/runs/{id}/filter"), Some(query)).await;
    let want: Vec<&Value> = front.iter().filter(|m| m["objectives"][5].as_f64().unwrap() <= cap).collect();
    assert_eq!(some.as_array().unwrap().iter().collect::<Vec<_>>(), want);

    let (_, none) = call(&app, "POST", &format!("/runs/{id}/filter"), Some(json!({"bounds": {"violations": {"upper": -1.0}}}))).await;
    assert!(none.as_array().unwrap().is_empty());

    let (status, body) = call(&app, "POST", &format!("/runs/{id}/filter"), Some(json!({"bounds": {"speed": {}}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("speed"));
    let (status, _) =
        call(&app, "POST", &format!("/runs/{id}/filter"), Some(json!({"bounds": {"afferent": {"lower": 2.0, "upper": 1.0}}}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/runs/ffff/filter", Some(json!({}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn constrained_runs() {
    let (_dir, app) = app();
    let id = completed_run(&app, 3).await;

    let pin = json!({
        "pins": [{"pattern": "sys.l0.p000", "layer": 3}, {"pattern": "sys.l2.*", "package": 4}],
        "overrides": {"seed": 9}
    });
    let (status, record) = call(&app, "POST", &format!("/runs/{id}/constrain"), Some(pin)).await;
    assert_eq!(status, StatusCode::ACCEPTED, "{record}");
    let child = record["id"].as_str().unwrap().to_string();
    assert_ne!(child, id);
    assert_eq!(record["config"]["seed"], 9);
    wait_done(&app, &child).await;
    let (_, front) = call(&app, "GET", &format!("/runs/{child}/front"), None).await;
    for member in front.as_array().unwrap() {
        let (_, detail) = call(&app, "GET", &format!("/solutions/{}", member["ref"].as_str().unwrap()), None).await;
        // slot 0 is the origin slot of sys.l0.p000
        assert_eq!(detail["package_to_layer"][0], 3);
        let pinned: Vec<&Value> = detail["units"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|u| u["name"].as_str().unwrap().starts_with("sys.l2."))
            .collect();
        assert!(!pinned.is_empty());
        assert!(pinned.iter().all(|u| u["package"] == 4), "{pinned:?}");
    }

    let conflict = json!({"pins": [
        {"pattern": "sys.l0.p000.T0", "package": 1},
        {"pattern": "sys.l0.p000.T0", "package": 2}
    ]});
    let before = call(&app, "GET", "/runs", None).await.1.as_array().unwrap().len();
    let (status, body) = call(&app, "POST", &format!("/runs/{id}/constrain"), Some(conflict)).await;
    assert_eq!(status, StatusCode::CONFLICT, "{body}");
    let message = body["error"].as_str().unwrap();
    assert!(message.contains("#0") && message.contains("#1"), "{message}");
    assert_eq!(call(&app, "GET", "/runs", None).await.1.as_array().unwrap().len(), before);

    let (status, _) = call(&app, "POST", &format!("/runs/{id}/constrain"), Some(json!({}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, "POST", "/runs/abc/constrain", Some(json!({"overrides": {"seed": 1}}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn reference_front_and_indicators() {
    let (_dir, app) = app();
    let a = completed_run(&app, 4).await;
    let b = completed_run(&app, 5).await;

    let (status, view) = call(&app, "GET", &format!("/reference-front?runs={a},{b}"), None).await;
    assert_eq!(status, StatusCode::OK, "{view}");
    let total: f64 = view["contributions"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    for s in view["solutions"].as_array().unwrap() {
        let (status, detail) = call(&app, "GET", &format!("/solutions/{}", s["ref"].as_str().unwrap()), None).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(detail["objectives"], s["objectives"]);
    }
    let (_, implicit) = call(&app, "GET", "/reference-front", None).await;
    assert_eq!(implicit, view);

    let (status, records) = call(&app, "GET", &format!("/indicators?runs={a},{b}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(records.as_array().unwrap().len(), 8);
    let (_, strided) = call(&app, "GET", &format!("/indicators?runs={a}&stride=3"), None).await;
    let evals: Vec<u64> = strided.as_array().unwrap().iter().map(|r| r["evals"].as_u64().unwrap()).collect();
    assert_eq!(evals, [150, 200]);

    let (status, _) = call(&app, "GET", "/indicators?runs=nope", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test(flavor = "multi_thread")]
async fn bad_requests() {
    let (_dir, app) = app();
    for uri in ["/runs/zzz", "/runs/../../etc", "/solutions/zzz:0", "/solutions/garbage", "/runs/zzz/front", "/runs/zzz/snapshots"] {
        let (status, _) = call(&app, "GET", uri, None).await;
        assert_eq!(status, StatusCode::NOT_FOUND, "{uri}");
    }
    let mut bad = serde_json::to_value(definition(0)).unwrap();
    bad["config"]["algorithm"] = json!("hill_climb");
    let (status, _) = call(&app, "POST", "/runs", Some(bad)).await;
    assert!(status.is_client_error());
    let mut bad = serde_json::to_value(definition(0)).unwrap();
    bad["config"]["max_evaluations"] = json!(0);
    let (status, body) = call(&app, "POST", "/runs", Some(bad)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
    assert!(call(&app, "GET", "/runs", None).await.1.as_array().unwrap().is_empty());
    let (status, _) = call(&app, "GET", "/reference-front", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}
