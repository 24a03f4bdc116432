//! Message types for `vgenv/1`.
//!
//! Every message is one JSON object on one line with a `type` tag and an
//! optional `id`, which the server copies into its response.

use crate::episode::{Observation, Outcome, RewardTerms};
use crate::geom::Point;
use crate::guidance::HybridVector;
use crate::render::{FRAME_COLS, FRAME_ROWS, STACK_BYTES, STACK_DEPTH};
use crate::world::{Action, SemanticClass};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

pub const PROTOCOL: &str = "vgenv/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Envelope<T> {
    pub fn new(id: Option<Value>, body: T) -> Self {
        Self { id, body }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Hello {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        protocol: Option<String>,
    },
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        /// Partial episode config merged over the server's base config.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<Value>,
    },
    Step {
        action: Action,
    },
    Render {
        #[serde(default)]
        format: FrameFormat,
    },
    Close,
}

const REQUEST_TYPES: [&str; 5] = ["hello", "reset", "step", "render", "close"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameFormat {
    /// Class ids, one byte per pixel, row-major.
    #[default]
    Raw,
    /// Binary PPM in palette colors.
    Ppm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Spec(SpecMsg),
    Observation(ObservationMsg),
    Frame(FrameMsg),
    Closed,
    Error { code: ErrorCode, message: String },
}

impl Response {
    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        Response::Error {
            code,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    /// Not JSON, not an object, or fields of the wrong shape.
    Malformed,
    UnknownType,
    VersionMismatch,
    /// `step` or `render` before any `reset`.
    NoEpisode,
    /// `step` after the episode reached a terminal state.
    EpisodeDone,
    BadAction,
    BadConfig,
    PlanError,
    /// The remote side sent a valid message that makes no sense here.
    Unexpected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaletteEntry {
    pub id: u8,
    pub name: String,
    pub color: [u8; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecMsg {
    pub protocol: String,
    pub actions: Vec<String>,
    pub observation_shape: [usize; 3],
    pub palette: Vec<PaletteEntry>,
    pub map: String,
}

impl SpecMsg {
    pub fn for_map(map: &str) -> Self {
        Self {
            protocol: PROTOCOL.to_string(),
            actions: Action::STANDARD
                .iter()
                .filter_map(|a| a.name())
                .map(str::to_string)
                .collect(),
            observation_shape: [STACK_DEPTH, FRAME_ROWS, FRAME_COLS],
            palette: SemanticClass::ALL
                .iter()
                .map(|c| PaletteEntry {
                    id: c.id(),
                    name: c.name().to_string(),
                    color: c.color(),
                })
                .collect(),
            map: map.to_string(),
        }
    }
}

/// Bytes carried as a base64 string.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Payload(pub Vec<u8>);

impl Serialize for Payload {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&B64.encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for Payload {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        B64.decode(text.as_bytes())
            .map(Payload)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub position: Point,
    pub heading: f64,
    pub omega: f64,
    pub waypoints_collected: usize,
    pub waypoints_total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationMsg {
    pub t: u64,
    /// Oldest frame first; `STACK_BYTES` class-id bytes.
    pub frames: Payload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hybrid_vector: Option<HybridVector>,
    pub reward: RewardTerms,
    pub terminal: bool,
    pub outcome: Option<Outcome>,
    pub info: StepInfo,
}

impl ObservationMsg {
    /// `None` when the observation carries no rendered frames.
    pub fn from_observation(obs: &Observation<'_>, outcome: Option<Outcome>) -> Option<Self> {
        let frames = obs.frames?.to_bytes();
        debug_assert_eq!(frames.len(), STACK_BYTES);
        Some(Self {
            t: obs.t,
            frames: Payload(frames),
            hybrid_vector: obs.hybrid,
            reward: obs.reward,
            terminal: outcome.is_some(),
            outcome,
            info: StepInfo {
                position: obs.agent.position,
                heading: obs.agent.heading,
                omega: obs.agent.omega,
                waypoints_collected: obs.waypoints.collected_count(),
                waypoints_total: obs.waypoints.len(),
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMsg {
    pub format: FrameFormat,
    pub rows: usize,
    pub cols: usize,
    pub data: Payload,
}

pub fn encode<T: Serialize>(msg: &Envelope<T>) -> String {
    serde_json::to_string(msg).expect("protocol messages always serialize")
}

fn malformed(id: Option<Value>, message: impl Into<String>) -> Envelope<Response> {
    Envelope::new(id, Response::error(ErrorCode::Malformed, message))
}

/// Parses one request line. On failure returns the error response to send,
/// with the request id when one could be read.
pub fn decode_request(line: &str) -> Result<Envelope<Request>, Envelope<Response>> {
    let value: Value =
        serde_json::from_str(line).map_err(|e| malformed(None, format!("invalid JSON: {e}")))?;
    let Value::Object(obj) = &value else {
        return Err(malformed(None, "message must be a JSON object"));
    };
    let id = obj.get("id").filter(|v| !v.is_null()).cloned();
    let kind = match obj.get("type") {
        Some(Value::String(k)) => k.clone(),
        _ => return Err(malformed(id, "missing string field `type`")),
    };
    if !REQUEST_TYPES.contains(&kind.as_str()) {
        return Err(Envelope::new(
            id,
            Response::error(ErrorCode::UnknownType, format!("unknown request type `{kind}`")),
        ));
    }
    if kind == "step" {
        if let Some(action) = obj.get("action") {
            match Action::deserialize(action) {
                Ok(a) if a.is_standard() => {}
                Ok(_) => {
                    return Err(Envelope::new(
                        id,
                        Response::error(ErrorCode::BadAction, "action is not in the action set"),
                    ))
                }
                Err(e) => {
                    return Err(Envelope::new(id, Response::error(ErrorCode::BadAction, e.to_string())))
                }
            }
        }
    }
    serde_json::from_value(value).map_err(|e| malformed(id, e.to_string()))
}

/// Parses one response line.
pub fn decode_response(line: &str) -> Result<Envelope<Response>, serde_json::Error> {
    serde_json::from_str(line)
}
