//! Observation values and events.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::EventError;

/// A JSON-like observation value.
///
/// Numbers are finite doubles. Equality on numbers is exact; `-0.0` and `0.0`
/// are the same value.
#[derive(Debug, Clone)]
pub enum Value {
    Str(String),
    Num(f64),
    Bool(bool),
    Map(BTreeMap<String, Value>),
    List(Vec<Value>),
}

impl Value {
    pub fn is_scalar(&self) -> bool {
        matches!(self, Value::Str(_) | Value::Num(_) | Value::Bool(_))
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&BTreeMap<String, Value>> {
        match self {
            Value::Map(m) => Some(m),
            _ => None,
        }
    }

    /// Checks the ingestion invariants: finite numbers and nonempty map keys.
    pub fn validate(&self) -> Result<(), EventError> {
        match self {
            Value::Num(n) if !n.is_finite() => Err(EventError::NonFiniteNumber),
            Value::Map(m) => {
                for (k, v) in m {
                    if k.is_empty() {
                        return Err(EventError::EmptyKey);
                    }
                    v.validate()?;
                }
                Ok(())
            }
            Value::List(items) => items.iter().try_for_each(Value::validate),
            _ => Ok(()),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Bool(_) => 0,
            Value::Num(_) => 1,
            Value::Str(_) => 2,
            Value::List(_) => 3,
            Value::Map(_) => 4,
        }
    }

    pub fn from_json(json: serde_json::Value) -> Result<Value, EventError> {
        Ok(match json {
            serde_json::Value::Null => return Err(EventError::Null),
            serde_json::Value::Bool(b) => Value::Bool(b),
            serde_json::Value::Number(n) => {
                let f = n.as_f64().ok_or(EventError::NonFiniteNumber)?;
                if !f.is_finite() {
                    return Err(EventError::NonFiniteNumber);
                }
                Value::Num(f)
            }
            serde_json::Value::String(s) => Value::Str(s),
            serde_json::Value::Array(items) => Value::List(
                items
                    .into_iter()
                    .map(Value::from_json)
                    .collect::<Result<_, _>>()?,
            ),
            serde_json::Value::Object(map) => {
                let mut out = BTreeMap::new();
                for (k, v) in map {
                    if k.is_empty() {
                        return Err(EventError::EmptyKey);
                    }
                    out.insert(k, Value::from_json(v)?);
                }
                Value::Map(out)
            }
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Num(n) => number_to_json(*n),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::List(items) => {
                serde_json::Value::Array(items.iter().map(Value::to_json).collect())
            }
            Value::Map(m) => {
                serde_json::Value::Object(m.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
            }
        }
    }
}

// Integral values are written without a fractional part so `3` round-trips as `3`.
fn number_to_json(n: f64) -> serde_json::Value {
    if n.fract() == 0.0 && n.abs() < 9.0e15 {
        serde_json::Value::from(n as i64)
    } else {
        serde_json::Number::from_f64(n)
            .map(serde_json::Value::Number)
            .unwrap_or(serde_json::Value::Null)
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Num(a), Value::Num(b)) => a.partial_cmp(b).unwrap_or_else(|| a.total_cmp(b)),
            (Value::List(a), Value::List(b)) => a.cmp(b),
            (Value::Map(a), Value::Map(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            Value::Str(s) => s.hash(state),
            Value::Num(n) => (n + 0.0).to_bits().hash(state),
            Value::Bool(b) => b.hash(state),
            Value::List(items) => items.hash(state),
            Value::Map(m) => m.hash(state),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "{}", serde_json::Value::String(s.clone())),
            Value::Num(n) => write!(f, "{}", number_to_json(*n)),
            Value::Bool(b) => write!(f, "{b}"),
            other => write!(f, "{}", other.to_json()),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Str(s)
    }
}

impl From<f64> for Value {
    fn from(n: f64) -> Self {
        Value::Num(n)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Num(n as f64)
    }
}

impl From<i32> for Value {
    fn from(n: i32) -> Self {
        Value::Num(n as f64)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = serde_json::Value::deserialize(deserializer)?;
        Value::from_json(json).map_err(serde::de::Error::custom)
    }
}

/// One observation fed to a monitor. The payload root is always a map.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    payload: BTreeMap<String, Value>,
}

impl Event {
    pub fn new(payload: BTreeMap<String, Value>) -> Result<Self, EventError> {
        let event = Event { payload };
        event.as_value_ref_check()?;
        Ok(event)
    }

    fn as_value_ref_check(&self) -> Result<(), EventError> {
        for (k, v) in &self.payload {
            if k.is_empty() {
                return Err(EventError::EmptyKey);
            }
            v.validate()?;
        }
        Ok(())
    }

    pub fn from_value(value: Value) -> Result<Self, EventError> {
        match value {
            Value::Map(m) => Event::new(m),
            _ => Err(EventError::NotAMap),
        }
    }

    pub fn from_json(json: serde_json::Value) -> Result<Self, EventError> {
        Event::from_value(Value::from_json(json)?)
    }

    pub fn parse_json(text: &str) -> Result<Self, EventError> {
        let json: serde_json::Value =
            serde_json::from_str(text).map_err(|e| EventError::Json(e.to_string()))?;
        Event::from_json(json)
    }

    pub fn payload(&self) -> &BTreeMap<String, Value> {
        &self.payload
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.payload.get(key)
    }

    pub fn to_value(&self) -> Value {
        Value::Map(self.payload.clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.payload
                .iter()
                .map(|(k, v)| (k.clone(), v.to_json()))
                .collect(),
        )
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_json())
    }
}

impl Serialize for Event {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Event {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let json = serde_json::Value::deserialize(deserializer)?;
        Event::from_json(json).map_err(serde::de::Error::custom)
    }
}

/// Builds an [`Event`] from `key => value` pairs; nested maps use `{ ... }`.
///
/// ```
/// use chatguard_rml::event;
/// let e = event! { "sender" => "user", "slots" => { "horizontal" => 3 } };
/// assert!(e.get("slots").is_some());
/// ```
#[macro_export]
macro_rules! event {
    ($($key:literal => $val:tt),* $(,)?) => {
        $crate::Event::from_value($crate::value!({ $($key => $val),* })).expect("valid event literal")
    };
}

/// Builds a [`Value`] literal.
#[macro_export]
macro_rules! value {
    ({ $($key:literal => $val:tt),* $(,)? }) => {{
        #[allow(unused_mut)]
        let mut map = ::std::collections::BTreeMap::new();
        $( map.insert($key.to_string(), $crate::value!($val)); )*
        $crate::Value::Map(map)
    }};
    ([ $($val:tt),* $(,)? ]) => {
        $crate::Value::List(vec![$($crate::value!($val)),*])
    };
    ($val:expr) => {
        $crate::Value::from($val)
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_keeps_integers() {
        let e = Event::parse_json(
            r#"{"slots":{"horizontal":3,"vertical":5},"nlu":{"confidence":0.6}}"#,
        )
        .unwrap();
        assert_eq!(
            e.to_json().to_string(),
            r#"{"nlu":{"confidence":0.6},"slots":{"horizontal":3,"vertical":5}}"#
        );
    }

    #[test]
    fn rejects_non_map_root_and_null() {
        assert_eq!(Event::parse_json("[1,2]"), Err(EventError::NotAMap));
        assert_eq!(Event::parse_json(r#"{"a":null}"#), Err(EventError::Null));
        assert_eq!(Event::parse_json(r#"{"":1}"#), Err(EventError::EmptyKey));
    }

    #[test]
    fn rejects_nan_from_rust_api() {
        let mut m = BTreeMap::new();
        m.insert("x".to_string(), Value::Num(f64::NAN));
        assert_eq!(Event::new(m), Err(EventError::NonFiniteNumber));
    }

    #[test]
    fn signed_zero_is_one_value() {
        assert_eq!(Value::Num(0.0), Value::Num(-0.0));
        use std::collections::hash_map::DefaultHasher;
        let h = |v: &Value| {
            let mut s = DefaultHasher::new();
            v.hash(&mut s);
            s.finish()
        };
        assert_eq!(h(&Value::Num(0.0)), h(&Value::Num(-0.0)));
    }

    #[test]
    fn macro_builds_nested_events() {
        let e = event! { "intent" => { "name" => "add_object" }, "slots" => { "horizontal" => 3 } };
        assert_eq!(
            e.get("intent")
                .and_then(|v| v.as_map())
                .and_then(|m| m.get("name")),
            Some(&Value::from("add_object"))
        );
    }
}
