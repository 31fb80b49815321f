//! Monitor and chatbot services started in this process.
//!
//! ```text
//! scenario = ../scenarios/factory.conf
//! spec_dir = ../properties            # optional, extra monitor specs
//! monitor.listen = 127.0.0.1:8080
//! chatbot.listen = 127.0.0.1:8081
//! alternative_cap = 10000
//! log_dir = logs                      # optional
//! ```

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use chatguard_rml::DEFAULT_ALTERNATIVE_CAP;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::runtime::Runtime;
use tokio::sync::watch;

use crate::chatbot::{ChatbotService, LinkFactory, Scenario, ScenarioError};
use crate::config::{Config, ConfigError};
use crate::monitor::{
    self, load_spec_dir, HttpLink, Level, LoadError, MonitorLink, MonitorService, ServiceOptions,
};

pub const MONITOR_LISTEN_ENV: &str = "CHATGUARD_MONITOR_LISTEN";
pub const CHATBOT_LISTEN_ENV: &str = "CHATGUARD_CHATBOT_LISTEN";

#[derive(Debug, Error)]
pub enum ServeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Specs(#[from] LoadError),
    #[error("cannot listen on {addr}: {source}")]
    Bind {
        addr: String,
        source: std::io::Error,
    },
    #[error("cannot start runtime: {0}")]
    Runtime(std::io::Error),
}

#[derive(Debug, Clone)]
pub struct StackConfig {
    pub scenario: Arc<Scenario>,
    pub spec_dir: Option<PathBuf>,
    pub level: Level,
    pub monitor_listen: String,
    pub chatbot_listen: String,
    pub alternative_cap: usize,
    pub log_dir: Option<PathBuf>,
}

impl StackConfig {
    /// Ephemeral loopback ports, no log directory.
    pub fn new(scenario: Arc<Scenario>, level: Level) -> Self {
        StackConfig {
            scenario,
            spec_dir: None,
            level,
            monitor_listen: "127.0.0.1:0".into(),
            chatbot_listen: "127.0.0.1:0".into(),
            alternative_cap: DEFAULT_ALTERNATIVE_CAP,
            log_dir: None,
        }
    }

    pub fn from_config(cfg: &Config, level: Level) -> Result<Self, ServeError> {
        let scenario = Scenario::load(cfg.resolve(cfg.require("scenario")?))?;
        let mut sc = StackConfig::new(Arc::new(scenario), level);
        sc.spec_dir = cfg.path("spec_dir");
        sc.log_dir = cfg.path("log_dir");
        sc.alternative_cap = cfg.parsed_or("alternative_cap", DEFAULT_ALTERNATIVE_CAP)?;
        if let Some(a) = cfg.get("monitor.listen") {
            sc.monitor_listen = a.to_string();
        }
        if let Some(a) = cfg.get("chatbot.listen") {
            sc.chatbot_listen = a.to_string();
        }
        Ok(sc)
    }

    /// Listen addresses from the environment win over the file.
    pub fn apply_env(mut self) -> Self {
        if let Ok(a) = std::env::var(MONITOR_LISTEN_ENV) {
            self.monitor_listen = a;
        }
        if let Ok(a) = std::env::var(CHATBOT_LISTEN_ENV) {
            self.chatbot_listen = a;
        }
        self
    }
}

/// Running services. Dropping the stack stops them.
pub struct Stack {
    runtime: Option<Runtime>,
    shutdown: watch::Sender<bool>,
    monitor: Option<(Arc<MonitorService>, SocketAddr)>,
    chatbot: (Arc<ChatbotService>, SocketAddr),
}

async fn bind(addr: &str) -> Result<TcpListener, ServeError> {
    TcpListener::bind(addr)
        .await
        .map_err(|source| ServeError::Bind {
            addr: addr.to_string(),
            source,
        })
}

impl Stack {
    /// Binds both listeners before returning, so the URLs are usable at once.
    pub fn start(config: StackConfig) -> Result<Stack, ServeError> {
        let runtime = tokio::runtime::Builder::new_multi_thread()
            .enable_all()
            .build()
            .map_err(ServeError::Runtime)?;
        let (shutdown, _) = watch::channel(false);
        let serve = |listener: TcpListener, router: axum::Router| {
            let mut rx = shutdown.subscribe();
            runtime.spawn(async move {
                let stop = async move {
                    let _ = rx.wait_for(|s| *s).await;
                };
                if let Err(e) = axum::serve(listener, router)
                    .with_graceful_shutdown(stop)
                    .await
                {
                    tracing::error!("server stopped: {e}");
                }
            });
        };

        let mut links: BTreeMap<Level, LinkFactory> = BTreeMap::new();
        let mut monitor = None;
        if config.level != Level::None {
            let mut specs = match &config.spec_dir {
                Some(dir) => load_spec_dir(dir)?,
                None => BTreeMap::new(),
            };
            specs.extend(config.scenario.specs());
            let options = ServiceOptions {
                level: config.level,
                alternative_cap: config.alternative_cap,
                log_dir: config.log_dir.clone(),
            };
            let service = Arc::new(MonitorService::new(specs, options));
            let listener = runtime.block_on(bind(&config.monitor_listen))?;
            let addr = listener.local_addr().map_err(ServeError::Runtime)?;
            serve(listener, monitor::http::router(service.clone()));
            let url = format!("http://{addr}");
            links.insert(
                config.level,
                Arc::new(move || Box::new(HttpLink::new(url.clone())) as Box<dyn MonitorLink>),
            );
            monitor = Some((service, addr));
        }

        let chatbot = Arc::new(ChatbotService::new(
            config.scenario.clone(),
            config.level,
            links,
        ));
        let listener = runtime.block_on(bind(&config.chatbot_listen))?;
        let addr = listener.local_addr().map_err(ServeError::Runtime)?;
        serve(listener, crate::chatbot::http::router(chatbot.clone()));

        Ok(Stack {
            runtime: Some(runtime),
            shutdown,
            monitor,
            chatbot: (chatbot, addr),
        })
    }

    pub fn level(&self) -> Level {
        self.chatbot.0.default_level()
    }

    pub fn chatbot_url(&self) -> String {
        format!("http://{}", self.chatbot.1)
    }

    pub fn monitor_url(&self) -> Option<String> {
        self.monitor.as_ref().map(|(_, a)| format!("http://{a}"))
    }

    pub fn monitor(&self) -> Option<&Arc<MonitorService>> {
        self.monitor.as_ref().map(|(s, _)| s)
    }

    pub fn chatbot(&self) -> &Arc<ChatbotService> {
        &self.chatbot.0
    }

    /// Blocks until Ctrl-C.
    pub fn wait_for_ctrl_c(&self) {
        if let Some(rt) = &self.runtime {
            let _ = rt.block_on(tokio::signal::ctrl_c());
        }
    }

    pub fn stop(mut self) {
        self.halt();
    }

    fn halt(&mut self) {
        let _ = self.shutdown.send(true);
        if let Some(rt) = self.runtime.take() {
            rt.shutdown_timeout(std::time::Duration::from_secs(2));
        }
    }
}

impl Drop for Stack {
    fn drop(&mut self) {
        self.halt();
    }
}
