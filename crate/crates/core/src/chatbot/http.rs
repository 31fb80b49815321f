//! HTTP binding of the chatbot.
//!
//! | method | path                               | body                  | reply              |
//! |--------|------------------------------------|-----------------------|--------------------|
//! | GET    | `/scenario`                        |                       | grid and levels    |
//! | POST   | `/conversations`                   | `{"monitor"?}`        | conversation info  |
//! | GET    | `/conversations/{id}`              |                       | conversation info  |
//! | POST   | `/conversations/{id}/messages`     | `{"text"}`            | turn and floor     |
//! | GET    | `/conversations/{id}/floor`        |                       | floor              |
//! | POST   | `/conversations/{id}/reset`        |                       | conversation info  |
//!
//! Conversation info carries the monitor base URL and one session id per
//! property, so a client can follow verdicts on the monitor's stream.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::CorsLayer;

use super::factory::Floor;
use super::nlu::Classifier;
use super::scenario::Scenario;
use super::wrapper::{Conversation, LinkFactory, Turn};
use crate::monitor::{Level, LinkError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRef {
    pub property: String,
    pub session: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationInfo {
    pub id: String,
    pub monitor: Level,
    pub monitor_url: Option<String>,
    pub sessions: Vec<SessionRef>,
    pub locked: bool,
    pub floor: Floor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MessageReply {
    #[serde(flatten)]
    pub turn: Turn,
    pub floor: Floor,
}

#[derive(Debug, thiserror::Error)]
pub enum ChatError {
    #[error("unknown conversation `{0}`")]
    UnknownConversation(String),
    #[error("no monitor is configured for level {0}")]
    LevelUnavailable(Level),
    #[error(transparent)]
    Link(#[from] LinkError),
}

impl IntoResponse for ChatError {
    fn into_response(self) -> Response {
        let (status, kind) = match &self {
            ChatError::UnknownConversation(_) => (StatusCode::NOT_FOUND, "unknown_conversation"),
            ChatError::LevelUnavailable(_) => (StatusCode::BAD_REQUEST, "level_unavailable"),
            ChatError::Link(_) => (StatusCode::BAD_GATEWAY, "monitor_unavailable"),
        };
        (
            status,
            Json(json!({"error": kind, "message": self.to_string()})),
        )
            .into_response()
    }
}

/// Conversations for one scenario, each bound to a monitor level.
pub struct ChatbotService {
    scenario: Arc<Scenario>,
    classifier: Arc<Classifier>,
    default_level: Level,
    links: BTreeMap<Level, LinkFactory>,
    conversations: Mutex<HashMap<String, Arc<Mutex<Conversation>>>>,
}

impl ChatbotService {
    /// `links` supplies a monitor connection per level; [`Level::None`] needs none.
    pub fn new(
        scenario: Arc<Scenario>,
        default_level: Level,
        links: BTreeMap<Level, LinkFactory>,
    ) -> Self {
        ChatbotService {
            classifier: Arc::new(scenario.classifier()),
            scenario,
            default_level,
            links,
            conversations: Mutex::new(HashMap::new()),
        }
    }

    pub fn scenario(&self) -> &Arc<Scenario> {
        &self.scenario
    }

    pub fn levels(&self) -> Vec<Level> {
        Level::ALL
            .into_iter()
            .filter(|l| *l == Level::None || self.links.contains_key(l))
            .collect()
    }

    pub fn default_level(&self) -> Level {
        self.default_level
    }

    fn get(&self, id: &str) -> Result<Arc<Mutex<Conversation>>, ChatError> {
        self.conversations
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ChatError::UnknownConversation(id.to_string()))
    }

    fn info(id: &str, c: &Conversation) -> ConversationInfo {
        ConversationInfo {
            id: id.to_string(),
            monitor: c.level(),
            monitor_url: c.monitor_endpoint(),
            sessions: c
                .sessions()
                .iter()
                .map(|(p, s)| SessionRef {
                    property: p.clone(),
                    session: s.clone(),
                })
                .collect(),
            locked: c.is_locked(),
            floor: c.floor(),
        }
    }

    /// Blocks on monitor I/O when the link is remote.
    pub fn open(&self, level: Option<Level>) -> Result<ConversationInfo, ChatError> {
        let level = level.unwrap_or(self.default_level);
        let link = match level {
            Level::None => None,
            l => Some(self.links.get(&l).ok_or(ChatError::LevelUnavailable(l))?()),
        };
        let conv = Conversation::with_classifier(
            self.scenario.clone(),
            self.classifier.clone(),
            level,
            link,
        )?;
        let id = uuid::Uuid::new_v4().to_string();
        let info = Self::info(&id, &conv);
        self.conversations
            .lock()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(conv)));
        Ok(info)
    }

    pub fn conversation(&self, id: &str) -> Result<ConversationInfo, ChatError> {
        let c = self.get(id)?;
        let c = c.lock().unwrap();
        Ok(Self::info(id, &c))
    }

    pub fn message(&self, id: &str, text: &str) -> Result<MessageReply, ChatError> {
        let c = self.get(id)?;
        let mut c = c.lock().unwrap();
        let turn = c.handle(text);
        Ok(MessageReply {
            turn,
            floor: c.floor(),
        })
    }

    pub fn floor(&self, id: &str) -> Result<Floor, ChatError> {
        Ok(self.get(id)?.lock().unwrap().floor())
    }

    pub fn reset(&self, id: &str) -> Result<ConversationInfo, ChatError> {
        let c = self.get(id)?;
        let mut c = c.lock().unwrap();
        c.reset()?;
        Ok(Self::info(id, &c))
    }

    pub fn close(&self, id: &str) -> Result<(), ChatError> {
        self.conversations
            .lock()
            .unwrap()
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ChatError::UnknownConversation(id.to_string()))
    }
}

#[derive(Deserialize, Default)]
struct OpenRequest {
    monitor: Option<Level>,
}

#[derive(Deserialize)]
struct MessageRequest {
    text: String,
}

type Svc = Arc<ChatbotService>;

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, ChatError> + Send + 'static,
) -> Result<T, ChatError> {
    tokio::task::spawn_blocking(f)
        .await
        .expect("chatbot task panicked")
}

pub fn router(service: Arc<ChatbotService>) -> Router {
    Router::new()
        .route("/health", get(|| async { Json(json!({"ok": true})) }))
        .route("/scenario", get(scenario))
        .route("/conversations", post(open))
        .route("/conversations/{id}", get(info).delete(close))
        .route("/conversations/{id}/messages", post(message))
        .route("/conversations/{id}/floor", get(floor))
        .route("/conversations/{id}/reset", post(reset))
        .layer(CorsLayer::permissive())
        .with_state(service)
}

async fn scenario(State(svc): State<Svc>) -> Json<serde_json::Value> {
    let s = svc.scenario();
    Json(json!({
        "name": s.name,
        "width": s.width,
        "height": s.height,
        "object_types": s.object_types,
        "properties": s.property_names(),
        "levels": svc.levels(),
        "default_level": svc.default_level(),
    }))
}

async fn open(
    State(svc): State<Svc>,
    body: Option<Json<OpenRequest>>,
) -> Result<Response, ChatError> {
    let level = body.and_then(|Json(b)| b.monitor);
    let info = blocking(move || svc.open(level)).await?;
    Ok((StatusCode::CREATED, Json(info)).into_response())
}

async fn info(
    State(svc): State<Svc>,
    Path(id): Path<String>,
) -> Result<Json<ConversationInfo>, ChatError> {
    svc.conversation(&id).map(Json)
}

async fn close(
    State(svc): State<Svc>,
    Path(id): Path<String>,
) -> Result<Json<serde_json::Value>, ChatError> {
    svc.close(&id)?;
    Ok(Json(json!({"ok": true})))
}

async fn message(
    State(svc): State<Svc>,
    Path(id): Path<String>,
    Json(req): Json<MessageRequest>,
) -> Result<Json<MessageReply>, ChatError> {
    blocking(move || svc.message(&id, &req.text))
        .await
        .map(Json)
}

async fn floor(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Json<Floor>, ChatError> {
    svc.floor(&id).map(Json)
}

async fn reset(
    State(svc): State<Svc>,
    Path(id): Path<String>,
) -> Result<Json<ConversationInfo>, ChatError> {
    blocking(move || svc.reset(&id)).await.map(Json)
}
