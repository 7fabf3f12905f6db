#![allow(dead_code)]

use axum::body::Body;
use axum::http::{header, HeaderMap, Method, Request, StatusCode};
use axum::Router;
use decalpaint_core::{save_png, Texture};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

pub const BOUNDARY: &str = "decalpaint-test-boundary";

pub struct Reply {
    pub status: StatusCode,
    pub headers: HeaderMap,
    pub body: Vec<u8>,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| {
            panic!("{e}: {}", String::from_utf8_lossy(&self.body));
        })
    }
}

pub async fn send(app: &Router, req: Request<Body>) -> Reply {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    Reply {
        status,
        headers,
        body,
    }
}

pub fn multipart(parts: &[(&str, &[u8])]) -> Request<Body> {
    let mut body = Vec::new();
    for (name, data) in parts {
        body.extend(format!("--{BOUNDARY}\r\nContent-Disposition: form-data; name=\"{name}\"; filename=\"{name}\"\r\n\r\n").as_bytes());
        body.extend_from_slice(data);
        body.extend(b"\r\n");
    }
    body.extend(format!("--{BOUNDARY}--\r\n").as_bytes());
    Request::builder()
        .method(Method::POST)
        .uri("/sessions")
        .header(
            header::CONTENT_TYPE,
            format!("multipart/form-data; boundary={BOUNDARY}"),
        )
        .body(Body::from(body))
        .unwrap()
}

pub fn create(obj: &str, texture: &Texture, map_size: u32) -> Request<Body> {
    let png = save_png(texture);
    let size = map_size.to_string();
    multipart(&[
        ("mesh", obj.as_bytes()),
        ("texture", &png),
        ("map_size", size.as_bytes()),
    ])
}

pub fn post(uri: &str, body: impl Into<Body>) -> Request<Body> {
    Request::builder()
        .method(Method::POST)
        .uri(uri)
        .body(body.into())
        .unwrap()
}

pub fn get(uri: &str) -> Request<Body> {
    Request::builder().uri(uri).body(Body::empty()).unwrap()
}

pub async fn session(app: &Router, obj: &str, texture: &Texture, map_size: u32) -> String {
    let r = send(app, create(obj, texture, map_size)).await;
    assert_eq!(
        r.status,
        StatusCode::OK,
        "{}",
        String::from_utf8_lossy(&r.body)
    );
    r.json()["id"].as_str().unwrap().to_owned()
}

pub async fn decal(app: &Router, id: &str, decal: &Texture) -> String {
    let r = send(
        app,
        post(&format!("/sessions/{id}/decals"), save_png(decal)),
    )
    .await;
    assert_eq!(r.status, StatusCode::OK);
    r.json()["decal_id"].as_str().unwrap().to_owned()
}

/// Full-coverage projector over the canonical quad, as request JSON.
pub fn full_cover(decal_id: &str) -> Value {
    serde_json::json!({
        "position": [0.5, 0.5, 1.0],
        "orientation": [0.0, 0.0, 0.0, 1.0],
        "scale": [0.5, 0.5, 2.0],
        "decal_id": decal_id,
    })
}

pub async fn stamp(app: &Router, id: &str, req: &Value) -> Reply {
    send(
        app,
        post(&format!("/sessions/{id}/stamps"), req.to_string()),
    )
    .await
}
