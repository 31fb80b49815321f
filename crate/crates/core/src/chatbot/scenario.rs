//! Scenario files: grid, object types, intents and active properties.
//!
//! ```text
//! name = factory
//! grid.width = 10
//! grid.height = 10
//! object_types = table, box, robot
//! counter_base = 0
//! counter_base.table = 1
//! properties = ../properties/factory/add_object.prop, ...
//! on_violation = rewind
//! on_monitor_error = fail_closed
//! intents = add_object, add_relative, remove_object
//! intent.add_object = add a {object_type} | add a {object_type} in position {horizontal} {vertical}
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chatguard_rml::{parse, Spec};
use thiserror::Error;

use super::factory::FactoryState;
use super::nlu::{Classifier, IntentDef, NluError};
use super::wrapper::{MonitorFailure, ViolationPolicy};
use crate::config::{Config, ConfigError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Nlu(#[from] NluError),
    #[error("intent `{0}` is listed but has no `intent.{0}` entry")]
    MissingIntent(String),
    #[error("{path}: {message}")]
    Property { path: PathBuf, message: String },
    #[error("two properties are named `{0}`")]
    DuplicateProperty(String),
    #[error("grid must be at least 1x1")]
    EmptyGrid,
}

/// An active property: its session name and specification.
#[derive(Debug, Clone)]
pub struct Property {
    pub name: String,
    pub path: PathBuf,
    pub spec: Arc<Spec>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub width: i64,
    pub height: i64,
    pub object_types: Vec<String>,
    pub counter_base: u32,
    pub counter_bases: BTreeMap<String, u32>,
    pub properties: Vec<Property>,
    pub intents: Vec<IntentDef>,
    pub on_violation: ViolationPolicy,
    pub on_monitor_error: MonitorFailure,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        Scenario::from_config(&Config::load(path)?)
    }

    pub fn from_config(cfg: &Config) -> Result<Scenario, ScenarioError> {
        let width = cfg.parsed_or("grid.width", 10i64)?;
        let height = cfg.parsed_or("grid.height", 10i64)?;
        if width < 1 || height < 1 {
            return Err(ScenarioError::EmptyGrid);
        }
        let mut counter_bases = BTreeMap::new();
        for (ty, v) in cfg.section("counter_base") {
            let base = v.parse().map_err(|_| ConfigError::Invalid {
                key: format!("counter_base.{ty}"),
                value: v.to_string(),
            })?;
            counter_bases.insert(ty.to_string(), base);
        }
        let mut properties: Vec<Property> = Vec::new();
        for entry in cfg.list("properties") {
            let path = cfg.resolve(&entry);
            let text = std::fs::read_to_string(&path).map_err(|e| ScenarioError::Property {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let spec = parse(&text).map_err(|e| ScenarioError::Property {
                path: path.clone(),
                message: e.to_string(),
            })?;
            let name = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            if properties.iter().any(|p| p.name == name) {
                return Err(ScenarioError::DuplicateProperty(name));
            }
            properties.push(Property {
                name,
                path,
                spec: Arc::new(spec),
            });
        }
        let mut intents = Vec::new();
        for name in cfg.list("intents") {
            let key = format!("intent.{name}");
            let templates: Vec<&str> = cfg
                .get(&key)
                .ok_or_else(|| ScenarioError::MissingIntent(name.clone()))?
                .split('|')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .collect();
            intents.push(IntentDef::new(name, &templates)?);
        }
        Ok(Scenario {
            name: cfg.get("name").unwrap_or("scenario").to_string(),
            width,
            height,
            object_types: cfg.list("object_types"),
            counter_base: cfg.parsed_or("counter_base", 0)?,
            counter_bases,
            properties,
            intents,
            on_violation: cfg.parsed_or("on_violation", ViolationPolicy::Rewind)?,
            on_monitor_error: cfg.parsed_or("on_monitor_error", MonitorFailure::FailClosed)?,
        })
    }

    pub fn classifier(&self) -> Classifier {
        Classifier::new(self.intents.clone(), self.object_types.clone())
    }

    pub fn new_state(&self) -> FactoryState {
        let mut s = FactoryState::new(self.width, self.height).with_counter_base(self.counter_base);
        for (ty, base) in &self.counter_bases {
            s = s.with_type_base(ty.clone(), *base);
        }
        s
    }

    /// Specifications keyed by property name, for an in-process monitor.
    pub fn specs(&self) -> BTreeMap<String, Arc<Spec>> {
        self.properties
            .iter()
            .map(|p| (p.name.clone(), p.spec.clone()))
            .collect()
    }

    pub fn property_names(&self) -> Vec<String> {
        self.properties.iter().map(|p| p.name.clone()).collect()
    }
}
