mod common;

use advtax_cli::server::router;
use advtax_cli::workspace::FixtureSet;
use advtax_cli::Workspace;
use axum::http::StatusCode;
use common::{call, cli, get, post, workspace};
use serde_json::json;

fn cruise_annotation(annotator: &str) -> serde_json::Value {
    json!({
        "report_id": "CRUISE-2023-10-02",
        "taxonomy_version": 1,
        "tags": ["G", "M", "B", "I", "E"],
        "primary": "M",
        "difficulty": 2,
        "annotator": annotator,
        "notes": ""
    })
}

#[tokio::test]
async fn coverage_endpoint_matches_cli_json() {
    let (dir, ws) = workspace(FixtureSet::Evaluation);
    let app = router(ws);
    let r = get(&app, "/api/coverage").await;
    assert_eq!(r.status, StatusCode::OK);
    let body = r.json();
    assert_eq!(body["primary_counts"]["Traffic Agents"], 72);
    assert_eq!(body["primary_counts"]["Driver"], 14);
    assert_eq!(body["unclassified"], 2);
    assert_eq!(body["success_rate"]["percent"], "98.3%");

    let (code, out, _) = cli(dir.path(), &["--format", "json", "stats", "coverage"]);
    assert_eq!(code, 0);
    let from_cli: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(from_cli, body);
}

#[tokio::test]
async fn annotation_validation_and_not_found() {
    let (dir, ws) = workspace(FixtureSet::Appendix);
    let log = ws.config.annotation_log.clone();
    let before = std::fs::read_to_string(&log).unwrap();
    let app = router(ws);

    let mut bad = cruise_annotation("alice");
    bad["primary"] = json!("H");
    bad["tags"] = json!(["G"]);
    let r = post(&app, "/api/annotations", bad).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["code"], "PrimaryNotInTags");

    let mut unknown = cruise_annotation("alice");
    unknown["report_id"] = json!("NOPE-1");
    let r = post(&app, "/api/annotations", unknown).await;
    assert_eq!(r.status, StatusCode::NOT_FOUND);
    assert_eq!(r.json()["code"], "UnknownReport");

    let mut grade = cruise_annotation("alice");
    grade["difficulty"] = json!(5);
    assert_eq!(
        post(&app, "/api/annotations", grade).await.json()["code"],
        "BadDifficulty"
    );

    let r = call(&app, "POST", "/api/annotations", None).await;
    assert_eq!(r.status, StatusCode::BAD_REQUEST);
    assert_eq!(r.json()["code"], "BadRequest");

    assert_eq!(std::fs::read_to_string(&log).unwrap(), before);
    drop(dir);
}

#[tokio::test]
async fn annotation_is_appended_and_survives_restart() {
    let (_dir, ws) = workspace(FixtureSet::Appendix);
    let config = ws.config.clone();
    let app = router(ws);
    let r = post(&app, "/api/annotations", cruise_annotation("alice")).await;
    assert_eq!(r.status, StatusCode::CREATED);
    let body = r.json();
    assert_eq!(body["annotation"]["annotator"], "alice");
    assert_eq!(body["warnings"], json!([]));

    // Gold stays effective, so coverage is unchanged by a second annotator.
    let coverage = get(&app, "/api/coverage").await.json();
    assert_eq!(coverage["primary_counts"]["Traffic Agents"], 1);
    assert_eq!(coverage["total"], 2);

    let view = get(&app, "/api/reports/CRUISE-2023-10-02").await.json();
    assert_eq!(view["annotation"]["annotator"], "gold");
    assert_eq!(view["report"]["manufacturer"], "Cruise");

    let restarted = Workspace::load(config).unwrap();
    assert_eq!(restarted.store.log().len(), 3);
    assert_eq!(
        serde_json::to_value(restarted.coverage(None).unwrap()).unwrap(),
        coverage
    );
}

#[tokio::test]
async fn concurrent_writes_are_serialized() {
    let (_dir, ws) = workspace(FixtureSet::Appendix);
    let config = ws.config.clone();
    let app = router(ws);
    let mut tasks = Vec::new();
    for i in 0..24 {
        let app = app.clone();
        tasks.push(tokio::spawn(async move {
            post(&app, "/api/annotations", cruise_annotation(&format!("a{i:02}")))
                .await
                .status
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::CREATED);
    }
    let text = std::fs::read_to_string(&config.annotation_log).unwrap();
    assert_eq!(text.lines().count(), 26);
    let restarted = Workspace::load(config).unwrap();
    assert_eq!(restarted.store.annotations_for("CRUISE-2023-10-02").count(), 25);
}

#[tokio::test]
async fn sample_is_deterministic() {
    let (_dir, ws) = workspace(FixtureSet::Evaluation);
    let app = router(ws);
    let a = get(&app, "/api/scenarios/sample?k=1&seed=7").await;
    let b = get(&app, "/api/scenarios/sample?k=1&seed=7").await;
    assert_eq!(a.status, StatusCode::OK);
    assert_eq!(a.bytes, b.bytes);
    assert_eq!(a.json().as_array().unwrap().len(), 1);
    let five = get(&app, "/api/scenarios/sample?k=5&seed=7").await.json();
    assert_eq!(five[0], a.json()[0]);

    let r = get(&app, "/api/scenarios/sample?k=0&seed=7").await;
    assert_eq!(
        (r.status, r.json()["code"].clone()),
        (StatusCode::BAD_REQUEST, json!("InvalidCount"))
    );
    assert_eq!(
        get(&app, "/api/scenarios/sample?seed=7").await.status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, "/api/scenarios/sample?k=x").await.status,
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn amend_uses_optimistic_concurrency() {
    let (_dir, ws) = workspace(FixtureSet::Evaluation);
    let file = ws.config.taxonomy_file.clone();
    let app = router(ws);
    let req = |v: u32| json!({ "leaf_id": "M", "definition": "Other road users in vehicles, moving or parked.", "rationale": "parked agents", "expected_version": v });
    let r = post(&app, "/api/taxonomy/amend", req(2)).await;
    assert_eq!(r.status, StatusCode::CONFLICT);
    assert_eq!(r.json()["current_version"], 1);

    let r = post(&app, "/api/taxonomy/amend", req(1)).await;
    assert_eq!(r.status, StatusCode::OK);
    let doc = r.json();
    assert_eq!(doc["version"], 2);
    assert_eq!(get(&app, "/api/taxonomy").await.json(), doc);
    let on_disk: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(on_disk, doc);

    // A second tab still holding version 1 is refused.
    assert_eq!(
        post(&app, "/api/taxonomy/amend", req(1)).await.status,
        StatusCode::CONFLICT
    );

    let mut missing = req(2);
    missing["leaf_id"] = json!("Z");
    assert_eq!(
        post(&app, "/api/taxonomy/amend", missing).await.status,
        StatusCode::NOT_FOUND
    );
    let mut empty = req(2);
    empty["definition"] = json!(" ");
    let r = post(&app, "/api/taxonomy/amend", empty).await;
    assert_eq!(
        (r.status, r.json()["code"].clone()),
        (StatusCode::BAD_REQUEST, json!("EmptyDefinition"))
    );

    // Annotations made under version 1 remain valid.
    let coverage = get(&app, "/api/coverage").await.json();
    assert_eq!(coverage["taxonomy_version"], 2);
    assert_eq!(coverage["total"], 116);
}

#[tokio::test]
async fn report_queries() {
    let (_dir, ws) = workspace(FixtureSet::Evaluation);
    let app = router(ws);
    let all = get(&app, "/api/reports").await.json();
    assert_eq!(all.as_array().unwrap().len(), 116);

    let cruise = get(&app, "/api/reports?manufacturer=cRuIsE").await.json();
    let cruise = cruise.as_array().unwrap();
    assert!(!cruise.is_empty());
    assert!(cruise.iter().all(|r| r["manufacturer"] == "Cruise"));

    let q = get(&app, "/api/reports?from=2023-03-01&to=2023-03-31&mode=autonomous")
        .await
        .json();
    for r in q.as_array().unwrap() {
        assert!(r["date"].as_str().unwrap().starts_with("2023-03"));
        assert_eq!(r["driving_mode"], "autonomous");
    }

    let r = get(&app, "/api/reports?from=2023-05-01&to=2023-01-01").await;
    assert_eq!(
        (r.status, r.json()["code"].clone()),
        (StatusCode::BAD_REQUEST, json!("InvalidRange"))
    );
    let r = get(&app, "/api/reports?from=May").await;
    assert_eq!(
        (r.status, r.json()["field"].clone()),
        (StatusCode::BAD_REQUEST, json!("from"))
    );
    assert_eq!(
        get(&app, "/api/reports?mode=warp").await.status,
        StatusCode::BAD_REQUEST
    );

    let one = get(&app, "/api/reports/CA-2023-001").await;
    assert_eq!(one.status, StatusCode::OK);
    assert_eq!(one.json()["annotation"]["primary"], "M");
    assert_eq!(
        get(&app, "/api/reports/CA-1999-999").await.status,
        StatusCode::NOT_FOUND
    );

    let s = get(&app, "/api/suggestions/CA-2023-001").await;
    assert_eq!(s.status, StatusCode::OK);
    assert_eq!(s.json()["suggestions"][0]["leaf_id"], "E");
    assert_eq!(
        get(&app, "/api/suggestions/CA-1999-999").await.status,
        StatusCode::NOT_FOUND
    );

    let r = get(&app, "/api/nope").await;
    assert_eq!(
        (r.status, r.json()["code"].clone()),
        (StatusCode::NOT_FOUND, json!("NoRoute"))
    );
}

#[tokio::test]
async fn taxonomy_document_round_trips() {
    let (_dir, ws) = workspace(FixtureSet::Evaluation);
    let expected = advtax_core::taxonomy::serialize(&ws.taxonomy);
    let app = router(ws);
    let r = get(&app, "/api/taxonomy").await;
    assert_eq!(String::from_utf8(r.bytes).unwrap(), expected);
    assert_eq!(advtax_core::taxonomy::deserialize(&expected).unwrap().leaves.len(), 15);
}

#[tokio::test]
async fn serves_over_tcp() {
    use tokio::io::{AsyncReadExt, AsyncWriteExt};
    let (_dir, ws) = workspace(FixtureSet::Evaluation);
    let (tx, rx) = tokio::sync::oneshot::channel();
    let server = tokio::spawn(advtax_cli::server::serve(
        ws,
        "127.0.0.1:0".parse().unwrap(),
        move |a| {
            let _ = tx.send(a);
        },
    ));
    let addr = rx.await.unwrap();
    let mut stream = tokio::net::TcpStream::connect(addr).await.unwrap();
    stream
        .write_all(b"GET /api/coverage HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n")
        .await
        .unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).await.unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.to_ascii_lowercase().contains("content-type: application/json"));
    assert!(response.contains("\"Traffic Agents\":72"));
    server.abort();
}
