use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::SystemTime;

use chatguard_rml::{
    parse, Event, MonitorError, MonitorState, ParseError, Spec, Verdict, DEFAULT_ALTERNATIVE_CAP,
};
use serde::Serialize;
use thiserror::Error;
use tokio::sync::mpsc;

use super::{Level, LogEntry, ServiceError, StreamItem, VerdictReport};
use crate::config::{Config, ConfigError};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("spec name `{name}` is defined by both {first} and {second}")]
    DuplicateName {
        name: String,
        first: PathBuf,
        second: PathBuf,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Loads every `.prop` file under `dir`, recursively. A spec is named after
/// its file stem.
pub fn load_spec_dir(dir: impl AsRef<Path>) -> Result<BTreeMap<String, Arc<Spec>>, LoadError> {
    let mut files = Vec::new();
    collect_props(dir.as_ref(), &mut files)?;
    files.sort();
    let mut specs = BTreeMap::new();
    let mut origin: BTreeMap<String, PathBuf> = BTreeMap::new();
    for path in files {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if let Some(first) = origin.get(&name) {
            return Err(LoadError::DuplicateName {
                name,
                first: first.clone(),
                second: path,
            });
        }
        let text = std::fs::read_to_string(&path).map_err(|source| LoadError::Io {
            path: path.clone(),
            source,
        })?;
        let spec = parse(&text).map_err(|source| LoadError::Parse {
            path: path.clone(),
            source,
        })?;
        specs.insert(name.clone(), Arc::new(spec));
        origin.insert(name, path);
    }
    Ok(specs)
}

fn collect_props(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), LoadError> {
    let entries = std::fs::read_dir(dir).map_err(|source| LoadError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let path = entry
            .map_err(|source| LoadError::Io {
                path: dir.to_path_buf(),
                source,
            })?
            .path();
        if path.is_dir() {
            collect_props(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "prop") {
            out.push(path);
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    pub level: Level,
    pub alternative_cap: usize,
    /// Directory for per-session JSON-lines logs.
    pub log_dir: Option<PathBuf>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            level: Level::Real,
            alternative_cap: DEFAULT_ALTERNATIVE_CAP,
            log_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionInfo {
    pub id: String,
    pub spec: String,
    pub level: Level,
    pub created_at_ms: u64,
    pub events_seen: u64,
    pub last: VerdictReport,
}

/// History delivered on subscription, followed by live items on `live`.
pub struct Subscription {
    pub history: Vec<LogEntry>,
    pub live: mpsc::UnboundedReceiver<StreamItem>,
}

struct Session {
    id: String,
    spec_name: String,
    spec: Arc<Spec>,
    state: Option<MonitorState>,
    created_at: SystemTime,
    last: VerdictReport,
    log: Vec<LogEntry>,
    subscribers: Vec<mpsc::UnboundedSender<StreamItem>>,
    log_file: Option<File>,
}

impl Session {
    fn publish(&mut self, item: StreamItem) {
        self.subscribers.retain(|s| s.send(item.clone()).is_ok());
    }

    fn info(&self, level: Level) -> SessionInfo {
        let created_at_ms = self
            .created_at
            .duration_since(SystemTime::UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        SessionInfo {
            id: self.id.clone(),
            spec: self.spec_name.clone(),
            level,
            created_at_ms,
            events_seen: self.log.len() as u64,
            last: self.last.clone(),
        }
    }
}

fn initial_report(level: Level, state: Option<&MonitorState>) -> VerdictReport {
    match (level, state) {
        (Level::Real, Some(s)) => VerdictReport {
            verdict: Verdict::Inconclusive,
            currently_accepting: s.outcome().currently_accepting,
            explanation: "no events yet".into(),
        },
        _ => dummy_report(),
    }
}

fn dummy_report() -> VerdictReport {
    VerdictReport {
        verdict: Verdict::True,
        currently_accepting: true,
        explanation: "dummy monitor".into(),
    }
}

fn describe(event: &Event) -> String {
    let get = |path: &[&str]| {
        let mut v = event.to_value();
        for p in path {
            v = v.as_map()?.get(*p)?.clone();
        }
        Some(v.to_string())
    };
    let what = get(&["intent", "name"])
        .or_else(|| get(&["last_action"]))
        .or_else(|| get(&["kind"]));
    match what {
        Some(w) => format!("event {w}"),
        None => "event".to_string(),
    }
}

/// Steps `state` and explains a violation with the frontier of the state
/// that could not consume the event.
fn step_real(state: &mut MonitorState, event: &Event) -> Result<VerdictReport, MonitorError> {
    if state.is_violated() {
        state.advance(event)?;
        return Ok(VerdictReport {
            verdict: Verdict::False,
            currently_accepting: false,
            explanation: "property was already violated".into(),
        });
    }
    let before = state.clone();
    let outcome = state.advance(event)?;
    let explanation = match outcome.verdict {
        Verdict::False => {
            let expected = before.expected();
            if expected.is_empty() {
                format!(
                    "{} arrived after the property was complete",
                    describe(event)
                )
            } else {
                format!(
                    "{} matches none of: {}",
                    describe(event),
                    expected.join(", ")
                )
            }
        }
        Verdict::True => "property satisfied".into(),
        Verdict::Inconclusive if outcome.currently_accepting => {
            "no violation; trace accepted so far".into()
        }
        Verdict::Inconclusive => "no violation".into(),
    };
    Ok(VerdictReport {
        verdict: outcome.verdict,
        currently_accepting: outcome.currently_accepting,
        explanation,
    })
}

/// In-memory session store over an immutable spec table.
pub struct MonitorService {
    specs: BTreeMap<String, Arc<Spec>>,
    options: ServiceOptions,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
}

impl MonitorService {
    pub fn new(specs: BTreeMap<String, Arc<Spec>>, options: ServiceOptions) -> Self {
        MonitorService {
            specs,
            options,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    /// Reads `spec_dir`, `alternative_cap` and `log_dir` from `cfg`.
    pub fn from_config(cfg: &Config, level: Level) -> Result<Self, LoadError> {
        let dir = cfg
            .path("spec_dir")
            .ok_or_else(|| ConfigError::Missing("spec_dir".into()))?;
        let options = ServiceOptions {
            level,
            alternative_cap: cfg.parsed_or("alternative_cap", DEFAULT_ALTERNATIVE_CAP)?,
            log_dir: cfg.path("log_dir"),
        };
        Ok(MonitorService::new(load_spec_dir(dir)?, options))
    }

    pub fn level(&self) -> Level {
        self.options.level
    }

    pub fn spec_names(&self) -> Vec<String> {
        self.specs.keys().cloned().collect()
    }

    pub fn spec(&self, name: &str) -> Option<&Arc<Spec>> {
        self.specs.get(name)
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .expect("session table poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn create_session(&self, spec_name: &str) -> Result<SessionInfo, ServiceError> {
        let spec = self
            .specs
            .get(spec_name)
            .ok_or_else(|| ServiceError::UnknownSpec(spec_name.to_string()))?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let state = (self.options.level == Level::Real)
            .then(|| MonitorState::with_cap(spec.clone(), self.options.alternative_cap));
        let log_file = self.options.log_dir.as_ref().and_then(|dir| {
            let _ = std::fs::create_dir_all(dir);
            match OpenOptions::new()
                .create(true)
                .append(true)
                .open(dir.join(format!("{spec_name}-{id}.jsonl")))
            {
                Ok(f) => Some(f),
                Err(e) => {
                    tracing::warn!("cannot open session log in {}: {e}", dir.display());
                    None
                }
            }
        });
        let session = Session {
            id: id.clone(),
            spec_name: spec_name.to_string(),
            spec: spec.clone(),
            last: initial_report(self.options.level, state.as_ref()),
            state,
            created_at: SystemTime::now(),
            log: Vec::new(),
            subscribers: Vec::new(),
            log_file,
        };
        let info = session.info(self.options.level);
        self.sessions
            .write()
            .expect("session table poisoned")
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(info)
    }

    pub fn session_info(&self, id: &str) -> Result<SessionInfo, ServiceError> {
        let session = self.session(id)?;
        let s = session.lock().expect("session poisoned");
        Ok(s.info(self.options.level))
    }

    /// Steps the session and returns its verdict. Calls on one session are
    /// serialized; the log order equals the order in which calls return.
    pub fn send_event(&self, id: &str, event: Event) -> Result<VerdictReport, ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session poisoned");
        let report = match s.state.as_mut() {
            Some(state) => step_real(state, &event).map_err(|e| match e {
                MonitorError::Overload { alternatives, cap } => {
                    ServiceError::Overload { alternatives, cap }
                }
            })?,
            None => dummy_report(),
        };
        let entry = LogEntry {
            index: s.log.len() as u64,
            event,
            report: report.clone(),
        };
        if let Some(f) = s.log_file.as_mut() {
            if let Ok(line) = serde_json::to_string(&entry) {
                let _ = writeln!(f, "{line}");
            }
        }
        s.last = report.clone();
        s.log.push(entry.clone());
        s.publish(StreamItem::Entry(entry));
        Ok(report)
    }

    /// Parses `body` as a JSON event, then behaves as [`Self::send_event`].
    pub fn send_json(&self, id: &str, body: &str) -> Result<VerdictReport, ServiceError> {
        let event =
            Event::parse_json(body).map_err(|e| ServiceError::MalformedEvent(e.to_string()))?;
        self.send_event(id, event)
    }

    pub fn reset_session(&self, id: &str) -> Result<(), ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session poisoned");
        if s.state.is_some() {
            s.state = Some(MonitorState::with_cap(
                s.spec.clone(),
                self.options.alternative_cap,
            ));
        }
        s.last = initial_report(self.options.level, s.state.as_ref());
        s.log.clear();
        if let Some(f) = s.log_file.as_mut() {
            let _ = writeln!(f, "{}", serde_json::json!({"type": "reset"}));
        }
        s.publish(StreamItem::Reset);
        Ok(())
    }

    pub fn log(&self, id: &str) -> Result<Vec<LogEntry>, ServiceError> {
        let session = self.session(id)?;
        let s = session.lock().expect("session poisoned");
        Ok(s.log.clone())
    }

    /// Current log plus a channel carrying every later item, with no gap
    /// or overlap between the two.
    pub fn subscribe(&self, id: &str) -> Result<Subscription, ServiceError> {
        let session = self.session(id)?;
        let mut s = session.lock().expect("session poisoned");
        let (tx, rx) = mpsc::unbounded_channel();
        s.subscribers.push(tx);
        Ok(Subscription {
            history: s.log.clone(),
            live: rx,
        })
    }

    /// Monitor state of a real-level session, for inspection.
    pub fn state(&self, id: &str) -> Result<Option<MonitorState>, ServiceError> {
        let session = self.session(id)?;
        let s = session.lock().expect("session poisoned");
        Ok(s.state.clone())
    }

    pub fn close_session(&self, id: &str) -> Result<(), ServiceError> {
        self.sessions
            .write()
            .expect("session table poisoned")
            .remove(id)
            .map(|_| ())
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().expect("session table poisoned").len()
    }
}
