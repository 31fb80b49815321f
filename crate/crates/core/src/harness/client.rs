//! Blocking HTTP client for the chatbot service.

use std::time::{Duration, Instant};

use serde::de::DeserializeOwned;
use serde_json::json;
use thiserror::Error;

use crate::chatbot::{ConversationInfo, Floor, MessageReply};
use crate::monitor::Level;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("chatbot unreachable at {url}: {message}")]
    Unreachable { url: String, message: String },
    #[error("chatbot answered {status}: {body}")]
    Status { status: u16, body: String },
    #[error("cannot decode reply: {0}")]
    Decode(String),
}

/// A reply and the wall-clock time from send to the last byte received.
#[derive(Debug, Clone)]
pub struct Timed<T> {
    pub value: T,
    pub latency: Duration,
}

#[derive(Clone)]
pub struct ChatClient {
    agent: ureq::Agent,
    base: String,
}

impl ChatClient {
    pub fn new(base: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .build()
            .into();
        ChatClient {
            agent,
            base: base.into().trim_end_matches('/').to_string(),
        }
    }

    pub fn base(&self) -> &str {
        &self.base
    }

    /// Performs one request and returns the raw body; only the round trip is timed.
    fn request(
        &self,
        method: &str,
        path: &str,
        body: Option<serde_json::Value>,
    ) -> Result<Timed<String>, ClientError> {
        let url = format!("{}{path}", self.base);
        let unreachable = |e: ureq::Error| ClientError::Unreachable {
            url: url.clone(),
            message: e.to_string(),
        };
        let payload = body.map(|b| b.to_string());
        let start = Instant::now();
        let mut resp = match (method, payload) {
            ("GET", _) => self.agent.get(&url).call(),
            ("DELETE", _) => self.agent.delete(&url).call(),
            (_, Some(p)) => self
                .agent
                .post(&url)
                .header("content-type", "application/json")
                .send(p.as_str()),
            (_, None) => self.agent.post(&url).send_empty(),
        }
        .map_err(unreachable)?;
        let text = resp.body_mut().read_to_string().map_err(unreachable)?;
        let latency = start.elapsed();
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            return Err(ClientError::Status { status, body: text });
        }
        Ok(Timed {
            value: text,
            latency,
        })
    }

    fn call<T: DeserializeOwned>(
        &self,
        method: &str,
        path: &str,
        body: Option<serde_json::Value>,
    ) -> Result<Timed<T>, ClientError> {
        let raw = self.request(method, path, body)?;
        let value =
            serde_json::from_str(&raw.value).map_err(|e| ClientError::Decode(e.to_string()))?;
        Ok(Timed {
            value,
            latency: raw.latency,
        })
    }

    pub fn health(&self) -> Result<(), ClientError> {
        self.request("GET", "/health", None).map(|_| ())
    }

    pub fn scenario(&self) -> Result<serde_json::Value, ClientError> {
        Ok(self.call("GET", "/scenario", None)?.value)
    }

    /// Opens a conversation at `level`, or the service default.
    pub fn open(&self, level: Option<Level>) -> Result<ConversationInfo, ClientError> {
        let body = match level {
            Some(l) => json!({ "monitor": l }),
            None => json!({}),
        };
        Ok(self.call("POST", "/conversations", Some(body))?.value)
    }

    pub fn send(&self, conversation: &str, text: &str) -> Result<Timed<MessageReply>, ClientError> {
        self.call(
            "POST",
            &format!("/conversations/{conversation}/messages"),
            Some(json!({ "text": text })),
        )
    }

    pub fn floor(&self, conversation: &str) -> Result<Floor, ClientError> {
        Ok(self
            .call("GET", &format!("/conversations/{conversation}/floor"), None)?
            .value)
    }

    pub fn reset(&self, conversation: &str) -> Result<ConversationInfo, ClientError> {
        Ok(self
            .call(
                "POST",
                &format!("/conversations/{conversation}/reset"),
                None,
            )?
            .value)
    }

    pub fn close(&self, conversation: &str) -> Result<(), ClientError> {
        self.request("DELETE", &format!("/conversations/{conversation}"), None)
            .map(|_| ())
    }
}
