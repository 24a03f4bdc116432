//! Agent kinematics: constant forward speed, heading driven by an angular
//! velocity that TURN actions accelerate.
//!
//! Sign convention for `omega`, `alpha` and bearing errors: positive turns
//! right (clockwise), negative turns left. Headings themselves stay in the
//! counter-clockwise frame of [`crate::geom`], so a positive `omega`
//! decreases the heading.

use crate::geom::{wrap_deg, Point};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const STANDARD_ALPHA: f64 = 35.0;
pub const DEFAULT_KAPPA: f64 = 2.0;
pub const DEFAULT_DT: f64 = 0.1;
pub const DEFAULT_OMEGA_MAX: f64 = 90.0;
pub const DEFAULT_SPEED: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Point,
    /// Degrees in `[-180, 180)`, counter-clockwise from +x.
    pub heading: f64,
    /// Degrees per second, positive = turning right.
    pub omega: f64,
    /// Meters per second.
    pub speed: f64,
    /// Step index.
    pub t: u64,
}

impl AgentState {
    pub fn new(position: Point, heading: f64) -> Self {
        Self {
            position,
            heading: wrap_deg(heading),
            omega: 0.0,
            speed: DEFAULT_SPEED,
            t: 0,
        }
    }

    pub fn forward(&self) -> Point {
        Point::from_heading(self.heading)
    }

    /// Signed bearing error to `target` in degrees, positive when the
    /// target is to the right. Zero when the target coincides with the agent.
    pub fn bearing_error(&self, target: Point) -> f64 {
        let d = target - self.position;
        if d.x == 0.0 && d.y == 0.0 {
            return 0.0;
        }
        wrap_deg(self.heading - d.bearing_deg())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Action {
    Noop,
    /// Angular acceleration in deg/s², positive turns right.
    Turn(f64),
}

impl Action {
    pub const TURN_LEFT: Action = Action::Turn(-STANDARD_ALPHA);
    pub const TURN_RIGHT: Action = Action::Turn(STANDARD_ALPHA);
    /// The discrete action set used by default.
    pub const STANDARD: [Action; 3] = [Action::Noop, Action::TURN_LEFT, Action::TURN_RIGHT];

    pub fn alpha(self) -> f64 {
        match self {
            Action::Noop => 0.0,
            Action::Turn(a) => a,
        }
    }

    pub fn name(self) -> Option<&'static str> {
        match self {
            Action::Noop => Some("noop"),
            a if a == Action::TURN_LEFT => Some("turn_left"),
            a if a == Action::TURN_RIGHT => Some("turn_right"),
            _ => None,
        }
    }

    pub fn from_name(name: &str) -> Option<Action> {
        match name {
            "noop" => Some(Action::Noop),
            "turn_left" => Some(Action::TURN_LEFT),
            "turn_right" => Some(Action::TURN_RIGHT),
            _ => None,
        }
    }

    pub fn is_standard(self) -> bool {
        Action::STANDARD.contains(&self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ActionRepr {
    Named(String),
    Turn { turn: f64 },
}

impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.name() {
            Some(n) => ActionRepr::Named(n.to_string()),
            None => ActionRepr::Turn { turn: self.alpha() },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match ActionRepr::deserialize(d)? {
            ActionRepr::Named(n) => Action::from_name(&n)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown action `{n}`"))),
            ActionRepr::Turn { turn } if turn.is_finite() => Ok(Action::Turn(turn)),
            ActionRepr::Turn { .. } => Err(serde::de::Error::custom("turn rate must be finite")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    /// Steering sensitivity.
    pub kappa: f64,
    /// Step length in seconds.
    pub dt: f64,
    /// Bound on |omega| in deg/s.
    pub omega_max: f64,
}

impl Default for DynamicsParams {
    fn default() -> Self {
        Self {
            kappa: DEFAULT_KAPPA,
            dt: DEFAULT_DT,
            omega_max: DEFAULT_OMEGA_MAX,
        }
    }
}

/// Advances the agent by one step of `params.dt` seconds.
pub fn step_dynamics(s: &AgentState, action: Action, params: &DynamicsParams) -> AgentState {
    debug_assert!(params.dt > 0.0);
    let omega = (s.omega + action.alpha() * params.kappa * params.dt)
        .clamp(-params.omega_max, params.omega_max);
    let heading = if omega == 0.0 {
        s.heading
    } else {
        wrap_deg(s.heading - omega * params.dt)
    };
    let position = s.position + Point::from_heading(heading) * (s.speed * params.dt);
    AgentState {
        position,
        heading,
        omega,
        speed: s.speed,
        t: s.t + 1,
    }
}
