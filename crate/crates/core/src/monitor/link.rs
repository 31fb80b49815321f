use std::sync::Arc;
use std::time::Duration;

use chatguard_rml::Event;
use serde::de::DeserializeOwned;
use serde_json::json;
use thiserror::Error;

use super::{MonitorService, ServiceError, VerdictReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("monitor unreachable: {0}")]
    Unreachable(String),
    #[error("monitor rejected the request ({status}): {message}")]
    Rejected { status: u16, message: String },
}

impl From<ServiceError> for LinkError {
    fn from(e: ServiceError) -> Self {
        let status = match e {
            ServiceError::UnknownSpec(_) | ServiceError::UnknownSession(_) => 404,
            ServiceError::MalformedEvent(_) => 400,
            ServiceError::Overload { .. } => 409,
        };
        LinkError::Rejected {
            status,
            message: e.to_string(),
        }
    }
}

/// The chatbot's view of a monitor: synchronous create, step and reset.
pub trait MonitorLink: Send {
    fn create_session(&mut self, spec: &str) -> Result<String, LinkError>;
    fn send_event(&mut self, session: &str, event: &Event) -> Result<VerdictReport, LinkError>;
    fn reset_session(&mut self, session: &str) -> Result<(), LinkError>;
    /// Base URL, for links that have one.
    fn endpoint(&self) -> Option<String> {
        None
    }
}

/// Calls a [`MonitorService`] in the same process.
#[derive(Clone)]
pub struct LocalLink(pub Arc<MonitorService>);

impl MonitorLink for LocalLink {
    fn create_session(&mut self, spec: &str) -> Result<String, LinkError> {
        Ok(self.0.create_session(spec)?.id)
    }

    fn send_event(&mut self, session: &str, event: &Event) -> Result<VerdictReport, LinkError> {
        Ok(self.0.send_event(session, event.clone())?)
    }

    fn reset_session(&mut self, session: &str) -> Result<(), LinkError> {
        Ok(self.0.reset_session(session)?)
    }
}

/// Talks to a monitor service over HTTP.
#[derive(Clone)]
pub struct HttpLink {
    agent: ureq::Agent,
    base: String,
}

impl HttpLink {
    pub fn new(base: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(10)))
            .http_status_as_error(false)
            .build()
            .into();
        HttpLink {
            agent,
            base: base.into().trim_end_matches('/').to_string(),
        }
    }

    fn post<T: DeserializeOwned>(
        &self,
        path: &str,
        body: &serde_json::Value,
    ) -> Result<T, LinkError> {
        let url = format!("{}{path}", self.base);
        let mut resp = self
            .agent
            .post(&url)
            .send_json(body)
            .map_err(|e| LinkError::Unreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| LinkError::Unreachable(e.to_string()))?;
        if !(200..300).contains(&status) {
            let message = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .and_then(|v| v.get("message").and_then(|m| m.as_str()).map(String::from))
                .unwrap_or(text);
            return Err(LinkError::Rejected { status, message });
        }
        serde_json::from_str(&text)
            .map_err(|e| LinkError::Unreachable(format!("bad reply from {url}: {e}")))
    }
}

impl MonitorLink for HttpLink {
    fn create_session(&mut self, spec: &str) -> Result<String, LinkError> {
        let v: serde_json::Value = self.post("/sessions", &json!({ "spec": spec }))?;
        v.get("id")
            .and_then(|id| id.as_str())
            .map(String::from)
            .ok_or_else(|| LinkError::Unreachable("session reply without id".into()))
    }

    fn send_event(&mut self, session: &str, event: &Event) -> Result<VerdictReport, LinkError> {
        self.post(&format!("/sessions/{session}/events"), &event.to_json())
    }

    fn reset_session(&mut self, session: &str) -> Result<(), LinkError> {
        let _: serde_json::Value = self.post(&format!("/sessions/{session}/reset"), &json!({}))?;
        Ok(())
    }

    fn endpoint(&self) -> Option<String> {
        Some(self.base.clone())
    }
}
