//! HTTP and WebSocket binding of [`MonitorService`].
//!
//! | method | path                     | body          | reply                |
//! |--------|--------------------------|---------------|----------------------|
//! | GET    | `/specs`                 |               | `["name", ...]`      |
//! | POST   | `/sessions`              | `{"spec"}`    | session info         |
//! | GET    | `/sessions/{id}`         |               | session info         |
//! | POST   | `/sessions/{id}/events`  | event         | verdict report       |
//! | POST   | `/sessions/{id}/reset`   |               | `{"ok": true}`       |
//! | GET    | `/sessions/{id}/log`     |               | `[entry, ...]`       |
//! | GET    | `/sessions/{id}/stream`  | WebSocket     | history, then live   |
//!
//! Errors are `{"error": kind, "message": text}`. Frames received on the
//! stream are treated as events for the session.

use std::sync::Arc;

use axum::extract::ws::{Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::json;
use tower_http::cors::CorsLayer;

use super::{MonitorService, ServiceError, StreamItem};

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0 {
            ServiceError::UnknownSpec(_) | ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::MalformedEvent(_) => StatusCode::BAD_REQUEST,
            ServiceError::Overload { .. } => StatusCode::CONFLICT,
        };
        (
            status,
            Json(json!({"error": self.0.kind(), "message": self.0.to_string()})),
        )
            .into_response()
    }
}

#[derive(Deserialize)]
struct CreateRequest {
    spec: String,
}

pub fn router(service: Arc<MonitorService>) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({"ok": true})) }))
        .route("/specs", get(specs))
        .route("/sessions", post(create))
        .route("/sessions/{id}", get(info))
        .route("/sessions/{id}/events", post(send))
        .route("/sessions/{id}/reset", post(reset))
        .route("/sessions/{id}/log", get(log))
        .route("/sessions/{id}/stream", get(stream))
        .layer(CorsLayer::permissive())
        .with_state(service)
}

async fn specs(State(s): State<Arc<MonitorService>>) -> impl IntoResponse {
    Json(json!({"level": s.level(), "specs": s.spec_names()}))
}

async fn create(
    State(s): State<Arc<MonitorService>>,
    body: String,
) -> Result<impl IntoResponse, Response> {
    let req: CreateRequest = serde_json::from_str(&body).map_err(|e| {
        (
            StatusCode::BAD_REQUEST,
            Json(json!({"error": "bad_request", "message": e.to_string()})),
        )
            .into_response()
    })?;
    let info = s
        .create_session(&req.spec)
        .map_err(|e| ApiError(e).into_response())?;
    Ok((StatusCode::CREATED, Json(info)))
}

async fn info(
    State(s): State<Arc<MonitorService>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.session_info(&id)?))
}

async fn send(
    State(s): State<Arc<MonitorService>>,
    Path(id): Path<String>,
    body: String,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.send_json(&id, &body)?))
}

async fn reset(
    State(s): State<Arc<MonitorService>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    s.reset_session(&id)?;
    Ok(Json(json!({"ok": true})))
}

async fn log(
    State(s): State<Arc<MonitorService>>,
    Path(id): Path<String>,
) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(s.log(&id)?))
}

async fn stream(
    State(s): State<Arc<MonitorService>>,
    Path(id): Path<String>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let sub = s.subscribe(&id)?;
    Ok(ws.on_upgrade(move |socket| pump(socket, s, id, sub)))
}

async fn pump(
    mut socket: WebSocket,
    service: Arc<MonitorService>,
    id: String,
    mut sub: super::Subscription,
) {
    for entry in sub.history.drain(..) {
        if send_item(&mut socket, &StreamItem::Entry(entry))
            .await
            .is_err()
        {
            return;
        }
    }
    loop {
        tokio::select! {
            item = sub.live.recv() => match item {
                Some(item) => {
                    if send_item(&mut socket, &item).await.is_err() {
                        return;
                    }
                }
                None => return,
            },
            msg = socket.recv() => match msg {
                Some(Ok(Message::Text(text))) => {
                    if let Err(e) = service.send_json(&id, text.as_str()) {
                        let frame = json!({"type": "error", "error": e.kind(), "message": e.to_string()});
                        if socket.send(Message::Text(frame.to_string().into())).await.is_err() {
                            return;
                        }
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

async fn send_item(socket: &mut WebSocket, item: &StreamItem) -> Result<(), axum::Error> {
    let text = serde_json::to_string(item).expect("stream items serialize");
    socket.send(Message::Text(text.into())).await
}
