//! A grid-world chatbot whose actions pass through runtime monitors.

pub mod decide;
pub mod events;
pub mod factory;
pub mod http;
pub mod nlu;
pub mod properties;
pub mod replay;
pub mod scenario;
pub mod wrapper;

pub use decide::{decide, BotAction};
pub use events::{bot_event, user_event};
pub use factory::{FactoryState, Floor, FloorObject};
pub use http::{ChatError, ChatbotService, ConversationInfo, MessageReply, SessionRef};
pub use nlu::{Classifier, Entity, IntentDef, NluResult};
pub use properties::spacing_property;
pub use replay::{parse_messages, read_messages, replay, Step, Transcript};
pub use scenario::{Property, Scenario, ScenarioError};
pub use wrapper::{
    Conversation, EventKind, LinkFactory, MonitorFailure, Outcome, PropertyVerdict, Turn,
    ViolationPolicy,
};
