//! Deterministic intent classifier.
//!
//! An utterance is lowercased and split on anything that is not a letter
//! or digit. Each template is aligned with the utterance by a longest
//! common subsequence, where a `{slot}` placeholder matches any token valid
//! for its entity. The confidence of a template is the aligned length over
//! the longer of the two token sequences. The best template wins; ties go
//! to the intent, then the template, declared first.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chatguard_rml::Value;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Intent reported when no template aligns with the utterance.
pub const FALLBACK_INTENT: &str = "fallback";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NluError {
    #[error("intent `{0}` has no templates")]
    NoTemplates(String),
    #[error("template `{template}`: unknown entity `{entity}`")]
    UnknownEntity { template: String, entity: String },
    #[error("template `{0}` is empty")]
    EmptyTemplate(String),
}

/// The five entities a template may extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Entity {
    ObjectType,
    Horizontal,
    Vertical,
    RelativePosition,
    ReferenceObject,
}

impl Entity {
    pub const ALL: [Entity; 5] = [
        Entity::ObjectType,
        Entity::Horizontal,
        Entity::Vertical,
        Entity::RelativePosition,
        Entity::ReferenceObject,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Entity::ObjectType => "object_type",
            Entity::Horizontal => "horizontal",
            Entity::Vertical => "vertical",
            Entity::RelativePosition => "relative_position",
            Entity::ReferenceObject => "reference_object",
        }
    }
}

impl FromStr for Entity {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Entity::ALL.into_iter().find(|e| e.name() == s).ok_or(())
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub const DIRECTIONS: [&str; 4] = ["left", "right", "front", "behind"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Word(String),
    Slot(Entity),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    text: String,
    pieces: Vec<Piece>,
}

impl Template {
    pub fn parse(text: &str) -> Result<Template, NluError> {
        let mut pieces = Vec::new();
        for raw in text.split_whitespace() {
            if let Some(name) = raw.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
                let entity = name.parse().map_err(|_| NluError::UnknownEntity {
                    template: text.to_string(),
                    entity: name.to_string(),
                })?;
                pieces.push(Piece::Slot(entity));
            } else {
                pieces.extend(tokenize(raw).into_iter().map(Piece::Word));
            }
        }
        if pieces.is_empty() {
            return Err(NluError::EmptyTemplate(text.to_string()));
        }
        Ok(Template {
            text: text.trim().to_string(),
            pieces,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn entities(&self) -> Vec<Entity> {
        self.pieces
            .iter()
            .filter_map(|p| match p {
                Piece::Slot(e) => Some(*e),
                Piece::Word(_) => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntentDef {
    pub name: String,
    pub templates: Vec<Template>,
}

impl IntentDef {
    pub fn new<S: AsRef<str>>(
        name: impl Into<String>,
        templates: &[S],
    ) -> Result<IntentDef, NluError> {
        let name = name.into();
        if templates.is_empty() {
            return Err(NluError::NoTemplates(name));
        }
        let templates = templates
            .iter()
            .map(|t| Template::parse(t.as_ref()))
            .collect::<Result<_, _>>()?;
        Ok(IntentDef { name, templates })
    }

    /// Entities any template of this intent can extract.
    pub fn entities(&self) -> Vec<Entity> {
        let mut out: Vec<Entity> = self.templates.iter().flat_map(Template::entities).collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluResult {
    pub intent: String,
    pub confidence: f64,
    pub slots: BTreeMap<String, Value>,
}

impl NluResult {
    pub fn fallback() -> NluResult {
        NluResult {
            intent: FALLBACK_INTENT.to_string(),
            confidence: 0.0,
            slots: BTreeMap::new(),
        }
    }

    pub fn slot_str(&self, entity: Entity) -> Option<&str> {
        self.slots.get(entity.name()).and_then(Value::as_str)
    }

    pub fn slot_int(&self, entity: Entity) -> Option<i64> {
        self.slots
            .get(entity.name())
            .and_then(Value::as_f64)
            .map(|n| n as i64)
    }
}

pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// Splits `table12` into `("table", 12)`.
pub fn split_object_id(token: &str) -> Option<(&str, u32)> {
    let digits = token.len() - token.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 || digits == token.len() {
        return None;
    }
    let (ty, idx) = token.split_at(token.len() - digits);
    Some((ty, idx.parse().ok()?))
}

#[derive(Debug, Clone)]
pub struct Classifier {
    intents: Vec<IntentDef>,
    object_types: Vec<String>,
}

impl Classifier {
    pub fn new(intents: Vec<IntentDef>, object_types: Vec<String>) -> Classifier {
        Classifier {
            intents,
            object_types,
        }
    }

    pub fn intents(&self) -> &[IntentDef] {
        &self.intents
    }

    fn is_object_id(&self, token: &str) -> bool {
        split_object_id(token).is_some_and(|(ty, _)| self.object_types.iter().any(|t| t == ty))
    }

    fn accepts(&self, entity: Entity, token: &str) -> bool {
        match entity {
            Entity::ObjectType => {
                self.object_types.iter().any(|t| t == token) || self.is_object_id(token)
            }
            Entity::Horizontal | Entity::Vertical => {
                !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit())
            }
            Entity::RelativePosition => DIRECTIONS.contains(&token),
            Entity::ReferenceObject => self.is_object_id(token),
        }
    }

    fn piece_matches(&self, piece: &Piece, token: &str) -> bool {
        match piece {
            Piece::Word(w) => w == token,
            Piece::Slot(e) => self.accepts(*e, token),
        }
    }

    /// Aligned length and extracted slots of one template.
    fn align(&self, template: &Template, tokens: &[String]) -> (usize, BTreeMap<String, Value>) {
        let (n, m) = (template.pieces.len(), tokens.len());
        let mut dp = vec![vec![0usize; m + 1]; n + 1];
        for i in 1..=n {
            for j in 1..=m {
                dp[i][j] = if self.piece_matches(&template.pieces[i - 1], &tokens[j - 1]) {
                    dp[i - 1][j - 1] + 1
                } else {
                    dp[i - 1][j].max(dp[i][j - 1])
                };
            }
        }
        let mut pairs = Vec::new();
        let (mut i, mut j) = (n, m);
        while i > 0 && j > 0 {
            if self.piece_matches(&template.pieces[i - 1], &tokens[j - 1])
                && dp[i][j] == dp[i - 1][j - 1] + 1
            {
                pairs.push((i - 1, j - 1));
                i -= 1;
                j -= 1;
            } else if dp[i - 1][j] >= dp[i][j - 1] {
                i -= 1;
            } else {
                j -= 1;
            }
        }
        pairs.reverse();
        let mut slots: BTreeMap<String, Value> = BTreeMap::new();
        for (pi, tj) in pairs {
            let Piece::Slot(entity) = template.pieces[pi] else {
                continue;
            };
            let token = &tokens[tj];
            let value = match entity {
                Entity::Horizontal | Entity::Vertical => match token.parse::<i64>() {
                    Ok(n) => Value::from(n),
                    Err(_) => continue,
                },
                Entity::RelativePosition => {
                    match slots.get(entity.name()).and_then(Value::as_str) {
                        Some(prev) => Value::from(format!("{prev}_{token}")),
                        None => Value::from(token.as_str()),
                    }
                }
                _ => Value::from(token.as_str()),
            };
            slots.insert(entity.name().to_string(), value);
        }
        (dp[n][m], slots)
    }

    pub fn classify(&self, utterance: &str) -> NluResult {
        let tokens = tokenize(utterance);
        if tokens.is_empty() {
            return NluResult::fallback();
        }
        let mut best: Option<(f64, &IntentDef, BTreeMap<String, Value>)> = None;
        for intent in &self.intents {
            for template in &intent.templates {
                let (aligned, slots) = self.align(template, &tokens);
                let confidence = aligned as f64 / template.pieces.len().max(tokens.len()) as f64;
                if best.as_ref().is_none_or(|(c, _, _)| confidence > *c) {
                    best = Some((confidence, intent, slots));
                }
            }
        }
        match best {
            Some((confidence, intent, slots)) if confidence > 0.0 => NluResult {
                intent: intent.name.clone(),
                confidence,
                slots,
            },
            _ => NluResult::fallback(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classifier() -> Classifier {
        Classifier::new(
            vec![
                IntentDef::new(
                    "add_object",
                    &[
                        "add a {object_type}",
                        "add a {object_type} in position {horizontal} {vertical}",
                    ],
                )
                .unwrap(),
                IntentDef::new(
                    "add_relative",
                    &["add a {object_type} {relative_position} of {reference_object}"],
                )
                .unwrap(),
                IntentDef::new("remove_object", &["remove {object_type}"]).unwrap(),
            ],
            vec!["table".into(), "box".into(), "robot".into()],
        )
    }

    #[test]
    fn tokenizes_punctuation_away() {
        assert_eq!(
            tokenize("Add a robot in position (3, 5)!"),
            ["add", "a", "robot", "in", "position", "3", "5"]
        );
    }

    #[test]
    fn splits_object_ids() {
        assert_eq!(split_object_id("table12"), Some(("table", 12)));
        assert_eq!(split_object_id("table"), None);
        assert_eq!(split_object_id("12"), None);
    }

    #[test]
    fn exact_template_has_full_confidence() {
        let r = classifier().classify("Add a table");
        assert_eq!(r.intent, "add_object");
        assert_eq!(r.confidence, 1.0);
        assert_eq!(r.slot_str(Entity::ObjectType), Some("table"));
        assert_eq!(r.slot_int(Entity::Horizontal), None);
    }

    #[test]
    fn coordinates_are_numbers() {
        let r = classifier().classify("Add a robot in position (3, 5)");
        assert_eq!(r.slot_int(Entity::Horizontal), Some(3));
        assert_eq!(r.slot_int(Entity::Vertical), Some(5));
        assert_eq!(r.confidence, 1.0);
    }

    #[test]
    fn relative_request() {
        let r = classifier().classify("Add a box right of table1");
        assert_eq!(r.intent, "add_relative");
        assert_eq!(r.slot_str(Entity::RelativePosition), Some("right"));
        assert_eq!(r.slot_str(Entity::ReferenceObject), Some("table1"));
    }

    #[test]
    fn partial_match_confidence_is_token_fraction() {
        // 3 of 6 tokens align with "add a {object_type}"
        let r = classifier().classify("please add a table now thanks");
        assert_eq!(r.intent, "add_object");
        assert_eq!(r.confidence, 0.5);
    }

    #[test]
    fn nothing_aligned_is_fallback() {
        assert_eq!(classifier().classify(""), NluResult::fallback());
        assert_eq!(classifier().classify("hello there"), NluResult::fallback());
    }

    #[test]
    fn unknown_entity_is_rejected() {
        assert!(matches!(
            IntentDef::new("x", &["do {thing}"]),
            Err(NluError::UnknownEntity { .. })
        ));
        assert!(matches!(
            IntentDef::new::<&str>("x", &[]),
            Err(NluError::NoTemplates(_))
        ));
    }
}
