//! The decision maker: from a classified utterance and the floor to the
//! action the bot will take. Pure; the floor is only read.

use serde::{Deserialize, Serialize};

use super::factory::FactoryState;
use super::nlu::{split_object_id, Entity, NluResult, FALLBACK_INTENT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum BotAction {
    AddObject {
        id: String,
        object_type: String,
        x: i64,
        y: i64,
    },
    AddRelative {
        id: String,
        object_type: String,
        x: i64,
        y: i64,
        reference: String,
        position: String,
    },
    RemoveObject {
        id: String,
        object_type: String,
        x: i64,
        y: i64,
    },
    /// A refusal, by the bot itself or after a monitor violation.
    Error {
        reason: String,
    },
    Listen,
}

impl BotAction {
    pub fn error(reason: impl Into<String>) -> BotAction {
        BotAction::Error {
            reason: reason.into(),
        }
    }

    /// Action name as it appears in `last_action`.
    pub fn name(&self) -> &'static str {
        match self {
            BotAction::AddObject { .. } => "utter_add_object",
            BotAction::AddRelative { .. } => "utter_add_relative",
            BotAction::RemoveObject { .. } => "utter_remove_object",
            BotAction::Error { .. } => "utter_error_message",
            BotAction::Listen => "listen",
        }
    }

    pub fn reply(&self) -> String {
        match self {
            BotAction::AddObject { id, x, y, .. } => format!("Added {id} at ({x},{y})"),
            BotAction::AddRelative {
                id,
                x,
                y,
                reference,
                position,
                ..
            } => {
                format!(
                    "Added {id} at ({x},{y}), {} of {reference}",
                    position.replace('_', " ")
                )
            }
            BotAction::RemoveObject { id, x, y, .. } => format!("Removed {id} from ({x},{y})"),
            BotAction::Error { reason } => format!("Sorry, I cannot do that: {reason}"),
            BotAction::Listen => {
                "Sorry, I did not understand. Try \"add a robot in position 3 5\".".into()
            }
        }
    }

    pub fn mutates(&self) -> bool {
        matches!(
            self,
            BotAction::AddObject { .. }
                | BotAction::AddRelative { .. }
                | BotAction::RemoveObject { .. }
        )
    }
}

/// Sum of the unit offsets of `position`, e.g. `front_left` is `(-1, 1)`.
pub fn offset(position: &str) -> Option<(i64, i64)> {
    let mut d = (0, 0);
    for part in position.split('_') {
        let (dx, dy) = match part {
            "left" => (-1, 0),
            "right" => (1, 0),
            "behind" => (0, -1),
            "front" => (0, 1),
            _ => return None,
        };
        d = (d.0 + dx, d.1 + dy);
    }
    Some(d)
}

/// Cells of the zone `position` names, e.g. `front_left` is the quadrant
/// with small `x` and large `y`.
fn zone(
    position: &str,
    width: i64,
    height: i64,
) -> Option<(std::ops::Range<i64>, std::ops::Range<i64>)> {
    let (mut xs, mut ys) = (0..width, 0..height);
    for part in position.split('_') {
        match part {
            "left" => xs = 0..width / 2,
            "right" => xs = width / 2..width,
            "behind" => ys = 0..height / 2,
            "front" => ys = height / 2..height,
            _ => return None,
        }
    }
    Some((xs, ys))
}

fn first_free(
    state: &FactoryState,
    xs: std::ops::Range<i64>,
    ys: std::ops::Range<i64>,
) -> Option<(i64, i64)> {
    ys.flat_map(|y| xs.clone().map(move |x| (x, y)))
        .find(|&(x, y)| state.is_free(x, y))
}

fn object_type_to_add(nlu: &NluResult) -> Result<String, BotAction> {
    match nlu.slot_str(Entity::ObjectType) {
        None => Err(BotAction::error("which object should I add?")),
        Some(t) if split_object_id(t).is_some() => {
            Err(BotAction::error(format!("{t} names an existing object")))
        }
        Some(t) => Ok(t.to_string()),
    }
}

fn check_target(state: &FactoryState, x: i64, y: i64) -> Result<(), BotAction> {
    if !state.contains(x, y) {
        return Err(BotAction::error(format!(
            "({x},{y}) is outside the {}x{} floor",
            state.width(),
            state.height()
        )));
    }
    if let Some(o) = state.at(x, y) {
        return Err(BotAction::error(format!(
            "({x},{y}) is occupied by {}",
            o.id
        )));
    }
    Ok(())
}

fn add_object(nlu: &NluResult, state: &FactoryState) -> Result<BotAction, BotAction> {
    let object_type = object_type_to_add(nlu)?;
    let (x, y) = match (
        nlu.slot_int(Entity::Horizontal),
        nlu.slot_int(Entity::Vertical),
    ) {
        (Some(x), Some(y)) => {
            check_target(state, x, y)?;
            (x, y)
        }
        (Some(_), None) | (None, Some(_)) => {
            return Err(BotAction::error("I need both coordinates"))
        }
        (None, None) => {
            let position = nlu.slot_str(Entity::RelativePosition);
            let (xs, ys) = match position {
                Some(p) => zone(p, state.width(), state.height())
                    .ok_or_else(|| BotAction::error(format!("unknown zone {p}")))?,
                None => (0..state.width(), 0..state.height()),
            };
            first_free(state, xs, ys).ok_or_else(|| match position {
                Some(p) => BotAction::error(format!("no free cell {}", p.replace('_', " "))),
                None => BotAction::error("the floor is full"),
            })?
        }
    };
    Ok(BotAction::AddObject {
        id: state.next_id(&object_type),
        object_type,
        x,
        y,
    })
}

fn add_relative(nlu: &NluResult, state: &FactoryState) -> Result<BotAction, BotAction> {
    let object_type = object_type_to_add(nlu)?;
    let reference = nlu
        .slot_str(Entity::ReferenceObject)
        .ok_or_else(|| BotAction::error("relative to which object?"))?;
    let position = nlu
        .slot_str(Entity::RelativePosition)
        .ok_or_else(|| BotAction::error(format!("where relative to {reference}?")))?;
    let anchor = state
        .object(reference)
        .ok_or_else(|| BotAction::error(format!("there is no {reference} on the floor")))?;
    let (dx, dy) =
        offset(position).ok_or_else(|| BotAction::error(format!("unknown position {position}")))?;
    let (x, y) = (anchor.x + dx, anchor.y + dy);
    check_target(state, x, y)?;
    Ok(BotAction::AddRelative {
        id: state.next_id(&object_type),
        object_type,
        x,
        y,
        reference: reference.to_string(),
        position: position.to_string(),
    })
}

fn remove_object(nlu: &NluResult, state: &FactoryState) -> Result<BotAction, BotAction> {
    let name = nlu
        .slot_str(Entity::ObjectType)
        .ok_or_else(|| BotAction::error("which object should I remove?"))?;
    if split_object_id(name).is_none() {
        return Err(BotAction::error(format!(
            "which {name}? Name it, e.g. {name}0"
        )));
    }
    let o = state
        .object(name)
        .ok_or_else(|| BotAction::error(format!("there is no {name} on the floor")))?;
    Ok(BotAction::RemoveObject {
        id: o.id.clone(),
        object_type: o.object_type.clone(),
        x: o.x,
        y: o.y,
    })
}

/// Chooses the bot's action. Refusals are returned as [`BotAction::Error`].
pub fn decide(nlu: &NluResult, state: &FactoryState) -> BotAction {
    let result = match nlu.intent.as_str() {
        "add_object" => add_object(nlu, state),
        "add_relative" => add_relative(nlu, state),
        "remove_object" => remove_object(nlu, state),
        FALLBACK_INTENT => Ok(BotAction::Listen),
        other => Err(BotAction::error(format!("I cannot handle {other}"))),
    };
    result.unwrap_or_else(|refusal| refusal)
}
