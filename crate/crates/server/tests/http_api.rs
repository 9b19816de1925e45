mod common;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use axum::Router;
use common::{open, request};
use serde_json::Value;
use tower::ServiceExt;
use trustgrid_core::Group;
use trustgrid_server::http::router;
use trustgrid_server::{ExportRecord, FrameBatch, Frames, SubmitRequest};

async fn call(app: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, String) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let resp = app
        .clone()
        .oneshot(req.body(body.map_or_else(Body::empty, Body::from)).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, String::from_utf8(bytes.to_vec()).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

/// Fails if any object key or string names a capability level.
fn assert_no_capability(v: &Value, ctx: &str) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                assert!(
                    !["capability", "fraction", "percent"].contains(&k.as_str()),
                    "{ctx}: key {k}"
                );
                assert_no_capability(x, ctx);
            }
        }
        Value::Array(a) => a.iter().for_each(|x| assert_no_capability(x, ctx)),
        Value::String(s) => assert!(
            !["c20", "c50", "c100", "20%", "50%", "100%"].contains(&s.as_str()),
            "{ctx}: {s}"
        ),
        _ => {}
    }
}

#[tokio::test]
async fn session_lifecycle_over_http() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(open(dir.path())));

    assert_eq!(
        call(&app, "GET", "/health", None).await,
        (StatusCode::OK, "ok".into())
    );
    let (st, body) = call(&app, "POST", "/sessions", None).await;
    assert_eq!(st, StatusCode::CREATED);
    let rec = json(&body);
    assert_eq!(rec["group"], "G0");
    assert_eq!(rec["status"], "active");
    let id = rec["session_id"].as_str().unwrap().to_string();

    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/trials/0"), None).await;
    assert_eq!(st, StatusCode::OK);
    assert!(json(&body)["searcher"].is_null());

    let (st, body) = call(&app, "GET", &format!("/sessions/{id}/trials/4"), None).await;
    assert_eq!(st, StatusCode::CONFLICT);
    assert_eq!(json(&body)["error"], "out_of_order");

    let req = request(Group::G0, 0);
    let frames = req.frames.clone().unwrap();
    for chunk in frames.0.chunks(60) {
        let batch = serde_json::to_string(&FrameBatch {
            frames: Frames(chunk.to_vec()),
        })
        .unwrap();
        let (st, _) = call(
            &app,
            "POST",
            &format!("/sessions/{id}/trials/0/frames"),
            Some(batch),
        )
        .await;
        assert_eq!(st, StatusCode::OK);
    }
    let submit = serde_json::to_string(&SubmitRequest {
        frames: None,
        survey: req.survey.clone(),
    })
    .unwrap();
    let (st, first) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/trials/0/submit"),
        Some(submit.clone()),
    )
    .await;
    assert_eq!(st, StatusCode::OK, "{first}");
    let (st, again) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/trials/0/submit"),
        Some(submit),
    )
    .await;
    assert_eq!((st, &again), (StatusCode::OK, &first));

    let (_, score) = call(&app, "GET", &format!("/sessions/{id}/score"), None).await;
    assert_eq!(json(&score)["trial_cursor"], 1);
    assert_eq!(
        json(&score)["cumulative_score"],
        json(&first)["cumulative_score"]
    );

    let (st, body) = call(&app, "GET", "/sessions/missing/score", None).await;
    assert_eq!(
        (st, json(&body)["error"].as_str()),
        (StatusCode::NOT_FOUND, Some("unknown_session"))
    );

    let (st, body) = call(&app, "POST", &format!("/sessions/{id}/abandon"), None).await;
    assert_eq!(
        (st, json(&body)["status"].as_str()),
        (StatusCode::OK, Some("abandoned"))
    );
}

#[tokio::test]
async fn invalid_uploads_are_unprocessable() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(open(dir.path())));
    let (_, body) = call(&app, "POST", "/sessions", None).await;
    let id = json(&body)["session_id"].as_str().unwrap().to_string();
    let mut req = request(Group::G0, 0);
    req.frames.as_mut().unwrap().0[30].pos[1] += 0.5;
    let (st, body) = call(
        &app,
        "POST",
        &format!("/sessions/{id}/trials/0/submit"),
        Some(serde_json::to_string(&req).unwrap()),
    )
    .await;
    assert_eq!(
        (st, json(&body)["error"].as_str()),
        (StatusCode::UNPROCESSABLE_ENTITY, Some("invalid_frames"))
    );
}

#[tokio::test]
async fn no_response_reveals_capability() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(open(dir.path())));
    let (_, body) = call(&app, "POST", "/sessions", None).await;
    let id = json(&body)["session_id"].as_str().unwrap().to_string();
    let (_, cfg) = call(&app, "GET", "/config", None).await;
    assert_no_capability(&json(&cfg), "config");
    for i in 0..15u32 {
        let (st, view) = call(&app, "GET", &format!("/sessions/{id}/trials/{i}"), None).await;
        assert_eq!(st, StatusCode::OK);
        assert_no_capability(&json(&view), "trial");
        if i >= 9 {
            let (st, line) = call(
                &app,
                "GET",
                &format!("/sessions/{id}/trials/{i}/report"),
                None,
            )
            .await;
            assert_eq!(st, StatusCode::OK);
            assert_no_capability(&json(&line), "report");
        }
        let req = serde_json::to_string(&request(Group::G0, i)).unwrap();
        let (st, res) = call(
            &app,
            "POST",
            &format!("/sessions/{id}/trials/{i}/submit"),
            Some(req),
        )
        .await;
        assert_eq!(st, StatusCode::OK, "{res}");
        assert_no_capability(&json(&res), "submit");
    }
    let (_, export) = call(&app, "GET", "/export", None).await;
    for line in export.lines() {
        assert_no_capability(&json(line), "export");
    }
}

#[tokio::test]
async fn export_endpoint_streams_ndjson() {
    let dir = tempfile::tempdir().unwrap();
    let app = router(Arc::new(open(dir.path())));
    let (st, body) = call(&app, "GET", "/export", None).await;
    assert_eq!((st, body.as_str()), (StatusCode::OK, ""));

    for _ in 0..2 {
        call(&app, "POST", "/sessions", None).await;
    }
    let (_, body) = call(&app, "GET", "/export?frames=false&group=G1", None).await;
    let recs: Vec<ExportRecord> = body
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(recs.len(), 1);
    assert!(matches!(&recs[0], ExportRecord::Session(s) if s.group == Group::G1));
}
