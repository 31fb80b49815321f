//! The decision wrapper: every user intent and every bot action is checked
//! by the monitor before the floor changes.
//!
//! For each message the user event is sent to every property session. If
//! any verdict is false the bot refuses and no action event is sent.
//! Otherwise the decision maker picks an action, the action event is sent,
//! and the floor changes only if no verdict is false.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use chatguard_rml::{Event, Verdict};
use serde::{Deserialize, Serialize};

use super::decide::{decide, BotAction};
use super::events::{bot_event, user_event};
use super::factory::{FactoryState, Floor};
use super::nlu::{Classifier, NluResult};
use super::scenario::Scenario;
use crate::monitor::{Level, LinkError, MonitorLink, VerdictReport};

/// What happens to the monitor sessions after a false verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationPolicy {
    /// Reset every session and replay the accepted events, so the
    /// conversation continues as if the refused message was never sent.
    Rewind,
    /// Refuse every later message.
    Lock,
}

impl FromStr for ViolationPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rewind" => Ok(ViolationPolicy::Rewind),
            "lock" => Ok(ViolationPolicy::Lock),
            other => Err(format!("unknown violation policy `{other}`")),
        }
    }
}

/// What happens when the monitor cannot be reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorFailure {
    FailClosed,
    FailOpen,
}

impl FromStr for MonitorFailure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fail_closed" => Ok(MonitorFailure::FailClosed),
            "fail_open" => Ok(MonitorFailure::FailOpen),
            other => Err(format!("unknown monitor failure mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    UserIntent,
    BotAction,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::UserIntent => "user_intent",
            EventKind::BotAction => "bot_action",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyVerdict {
    pub property: String,
    pub session: String,
    pub event: EventKind,
    #[serde(flatten)]
    pub report: VerdictReport,
}

/// Where a message stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// The action ran; it may still be a refusal by the bot itself.
    Executed,
    /// A false verdict on the user event.
    BlockedAtIntent,
    /// A false verdict on the action event.
    BlockedAtAction,
    /// The monitor could not be reached and the wrapper fails closed.
    MonitorUnavailable,
    /// An earlier violation locked the conversation.
    Locked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub utterance: String,
    pub nlu: NluResult,
    /// The action the decision maker chose, if it was consulted.
    pub decided: Option<BotAction>,
    /// The action actually taken.
    pub action: BotAction,
    pub reply: String,
    pub outcome: Outcome,
    pub verdicts: Vec<PropertyVerdict>,
    pub mutated: bool,
    pub monitor_errors: Vec<String>,
}

impl Turn {
    pub fn any_false(&self) -> bool {
        self.verdicts.iter().any(|v| v.report.is_false())
    }

    /// False if any verdict is false, true if all are true, `None` when
    /// no monitor answered.
    pub fn verdict(&self) -> Option<Verdict> {
        if self.verdicts.is_empty() {
            None
        } else if self.any_false() {
            Some(Verdict::False)
        } else if self
            .verdicts
            .iter()
            .all(|v| v.report.verdict == Verdict::True)
        {
            Some(Verdict::True)
        } else {
            Some(Verdict::Inconclusive)
        }
    }
}

/// Creates one monitor connection per conversation.
pub type LinkFactory = Arc<dyn Fn() -> Box<dyn MonitorLink> + Send + Sync>;

/// One user's conversation: floor, classifier and monitor sessions.
pub struct Conversation {
    scenario: Arc<Scenario>,
    classifier: Arc<Classifier>,
    level: Level,
    state: FactoryState,
    link: Option<Box<dyn MonitorLink>>,
    sessions: Vec<(String, String)>,
    committed: Vec<Event>,
    locked: bool,
}

enum Fanout {
    Ok,
    Violated(String),
    Unavailable,
}

impl Conversation {
    /// Opens a conversation. A link is required unless `level` is
    /// [`Level::None`], in which case it is ignored.
    pub fn open(
        scenario: Arc<Scenario>,
        level: Level,
        link: Option<Box<dyn MonitorLink>>,
    ) -> Result<Self, LinkError> {
        let classifier = Arc::new(scenario.classifier());
        Conversation::with_classifier(scenario, classifier, level, link)
    }

    pub fn with_classifier(
        scenario: Arc<Scenario>,
        classifier: Arc<Classifier>,
        level: Level,
        link: Option<Box<dyn MonitorLink>>,
    ) -> Result<Self, LinkError> {
        let mut link = if level == Level::None { None } else { link };
        if level != Level::None && link.is_none() {
            return Err(LinkError::Unreachable(format!(
                "no monitor link for level {level}"
            )));
        }
        let mut sessions = Vec::new();
        if let Some(l) = link.as_mut() {
            for p in &scenario.properties {
                sessions.push((p.name.clone(), l.create_session(&p.name)?));
            }
        }
        Ok(Conversation {
            state: scenario.new_state(),
            scenario,
            classifier,
            level,
            link,
            sessions,
            committed: Vec::new(),
            locked: false,
        })
    }

    pub fn level(&self) -> Level {
        self.level
    }

    pub fn state(&self) -> &FactoryState {
        &self.state
    }

    pub fn floor(&self) -> Floor {
        self.state.floor()
    }

    /// `(property, session id)` pairs.
    pub fn sessions(&self) -> &[(String, String)] {
        &self.sessions
    }

    pub fn is_locked(&self) -> bool {
        self.locked
    }

    pub fn monitor_endpoint(&self) -> Option<String> {
        self.link.as_ref().and_then(|l| l.endpoint())
    }

    /// Empty floor, fresh sessions.
    pub fn reset(&mut self) -> Result<(), LinkError> {
        self.state = self.scenario.new_state();
        self.committed.clear();
        self.locked = false;
        if let Some(link) = self.link.as_mut() {
            for (_, id) in &self.sessions {
                link.reset_session(id)?;
            }
        }
        Ok(())
    }

    fn fan_out(&mut self, event: &Event, kind: EventKind, turn: &mut Turn) -> Fanout {
        let Some(link) = self.link.as_mut() else {
            return Fanout::Ok;
        };
        let mut violation = None;
        let mut unavailable = false;
        for (property, session) in &self.sessions {
            match link.send_event(session, event) {
                Ok(report) => {
                    if report.is_false() && violation.is_none() {
                        violation = Some(format!("{property}: {}", report.explanation));
                    }
                    turn.verdicts.push(PropertyVerdict {
                        property: property.clone(),
                        session: session.clone(),
                        event: kind,
                        report,
                    });
                }
                Err(e) => {
                    tracing::warn!("monitor error for {property}: {e}");
                    turn.monitor_errors.push(format!("{property}: {e}"));
                    unavailable = true;
                }
            }
        }
        match violation {
            Some(v) => Fanout::Violated(v),
            None if unavailable && self.scenario.on_monitor_error == MonitorFailure::FailClosed => {
                Fanout::Unavailable
            }
            None => Fanout::Ok,
        }
    }

    fn after_violation(&mut self) {
        match self.scenario.on_violation {
            ViolationPolicy::Lock => self.locked = true,
            ViolationPolicy::Rewind => {
                let Some(link) = self.link.as_mut() else {
                    return;
                };
                for (property, session) in &self.sessions {
                    let replayed = link.reset_session(session).and_then(|_| {
                        for e in &self.committed {
                            if link.send_event(session, e)?.is_false() {
                                return Err(LinkError::Rejected {
                                    status: 0,
                                    message: "replay violated".into(),
                                });
                            }
                        }
                        Ok(())
                    });
                    if let Err(e) = replayed {
                        tracing::warn!("rewind of {property} failed, locking conversation: {e}");
                        self.locked = true;
                    }
                }
            }
        }
    }

    fn refuse(&mut self, turn: &mut Turn, outcome: Outcome, reason: String) {
        turn.action = BotAction::error(reason);
        turn.reply = turn.action.reply();
        turn.outcome = outcome;
        if matches!(outcome, Outcome::BlockedAtIntent | Outcome::BlockedAtAction) {
            self.after_violation();
        }
    }

    /// Classifies, checks, decides, checks and, if allowed, acts.
    pub fn handle(&mut self, utterance: &str) -> Turn {
        let nlu = self.classifier.classify(utterance);
        self.execute(utterance, nlu)
    }

    /// The wrapper flow for an already classified utterance.
    pub fn execute(&mut self, utterance: &str, nlu: NluResult) -> Turn {
        let mut turn = Turn {
            utterance: utterance.to_string(),
            nlu,
            decided: None,
            action: BotAction::Listen,
            reply: String::new(),
            outcome: Outcome::Executed,
            verdicts: Vec::new(),
            mutated: false,
            monitor_errors: Vec::new(),
        };
        if self.locked {
            turn.action = BotAction::error("the conversation is locked after a violation");
            turn.reply = turn.action.reply();
            turn.outcome = Outcome::Locked;
            return turn;
        }
        let user = user_event(&turn.nlu);
        match self.fan_out(&user, EventKind::UserIntent, &mut turn) {
            Fanout::Ok => {}
            Fanout::Violated(why) => {
                self.refuse(&mut turn, Outcome::BlockedAtIntent, why);
                return turn;
            }
            Fanout::Unavailable => {
                self.refuse(
                    &mut turn,
                    Outcome::MonitorUnavailable,
                    "the monitor is unavailable".into(),
                );
                return turn;
            }
        }
        let action = decide(&turn.nlu, &self.state);
        turn.decided = Some(action.clone());
        let bot = bot_event(&action);
        match self.fan_out(&bot, EventKind::BotAction, &mut turn) {
            Fanout::Ok => {}
            Fanout::Violated(why) => {
                self.refuse(&mut turn, Outcome::BlockedAtAction, why);
                return turn;
            }
            Fanout::Unavailable => {
                self.refuse(
                    &mut turn,
                    Outcome::MonitorUnavailable,
                    "the monitor is unavailable".into(),
                );
                return turn;
            }
        }
        if self.link.is_some() {
            self.committed.push(user);
            self.committed.push(bot);
        }
        turn.mutated = self.state.apply(&action);
        turn.reply = action.reply();
        turn.action = action;
        turn
    }
}
