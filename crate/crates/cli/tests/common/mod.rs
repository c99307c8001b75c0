#![allow(dead_code)]

use advtax_cli::workspace::{init, FixtureSet};
use advtax_cli::{Workspace, WorkspaceConfig};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use tower::ServiceExt;

pub fn workspace(fixtures: FixtureSet) -> (tempfile::TempDir, Workspace) {
    let dir = tempfile::tempdir().unwrap();
    let config = WorkspaceConfig::for_data_dir(dir.path());
    init(&config, Some(fixtures)).unwrap();
    let ws = Workspace::load(config).unwrap();
    (dir, ws)
}

pub struct Reply {
    pub status: StatusCode,
    pub bytes: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&self.bytes)))
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<serde_json::Value>) -> Reply {
    let builder = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => builder
            .header("content-type", "application/json")
            .body(Body::from(v.to_string()))
            .unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, bytes }
}

pub async fn get(app: &Router, uri: &str) -> Reply {
    call(app, "GET", uri, None).await
}

pub async fn post(app: &Router, uri: &str, body: serde_json::Value) -> Reply {
    call(app, "POST", uri, Some(body)).await
}

/// Run the CLI in process against `dir`.
pub fn cli(dir: &std::path::Path, args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["advtax", "--data-dir", dir.to_str().unwrap()];
    argv.extend_from_slice(args);
    let code = advtax_cli::run(argv, None, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
