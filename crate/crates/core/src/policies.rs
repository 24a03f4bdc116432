//! Scripted policies: privileged-state oracles, a hybrid-vector follower and
//! a seeded random baseline.

use crate::episode::Observation;
use crate::geom::{point_at, project, Point};
use crate::guidance::{next_waypoint, GuidanceScheme, HybridVector};
use crate::planner::WaypointSet;
use crate::world::{Action, AgentState, DynamicsParams, STANDARD_ALPHA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const DEFAULT_DEADBAND: f64 = 3.0;
pub const DEFAULT_LOOKAHEAD: f64 = 6.0;
/// Chord floor for the waypoint oracle, which has no lookahead of its own.
pub const GREEDY_MIN_CHORD: f64 = 9.0;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("remote agent: {0}")]
    Remote(String),
    #[error("remote agent i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn reset(&mut self) {}

    /// Whether `act` reads rendered frames. Episodes skip rendering otherwise.
    fn wants_frames(&self) -> bool {
        false
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, PolicyError>;
}

/// Steering law shared by the oracles.
///
/// The target turn rate is the pure-pursuit rate for an arc through the
/// target, with the arc chord floored at `min_chord` so close targets do not
/// demand tight turns. It is zero inside the deadband. The bearing error
/// used is the one predicted after the current turn rate is unwound. The standard action that moves the
/// current turn rate toward it is emitted; NOOP when it is already within
/// half a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteeringLaw {
    pub deadband_deg: f64,
    pub min_chord: f64,
    pub dynamics: DynamicsParams,
}

impl Default for SteeringLaw {
    fn default() -> Self {
        Self {
            deadband_deg: DEFAULT_DEADBAND,
            min_chord: DEFAULT_LOOKAHEAD,
            dynamics: DynamicsParams::default(),
        }
    }
}

impl SteeringLaw {
    pub fn desired_omega(&self, agent: &AgentState, target: Point) -> f64 {
        // Heading still changes while omega is brought back to zero; steer
        // on the error that would remain after braking.
        let decel = STANDARD_ALPHA * self.dynamics.kappa;
        let err = agent.bearing_error(target) - agent.omega * agent.omega.abs() / (2.0 * decel);
        if err.abs() <= self.deadband_deg {
            return 0.0;
        }
        let max = self.dynamics.omega_max;
        if err.abs() >= 90.0 {
            return max.copysign(err);
        }
        let dist = agent.position.distance(target).max(self.min_chord).max(1e-6);
        (2.0 * agent.speed * err.to_radians().sin() / dist)
            .to_degrees()
            .clamp(-max, max)
    }

    pub fn steer(&self, agent: &AgentState, target: Point) -> Action {
        let desired = self.desired_omega(agent, target);
        let half_step = 0.5 * STANDARD_ALPHA * self.dynamics.kappa * self.dynamics.dt;
        if desired > agent.omega + half_step {
            Action::TURN_RIGHT
        } else if desired < agent.omega - half_step {
            Action::TURN_LEFT
        } else {
            Action::Noop
        }
    }
}

/// Steers toward the path point `lookahead` meters past the agent's
/// projection.
pub fn pure_pursuit_path(agent: &AgentState, path: &[Point], lookahead: f64, law: &SteeringLaw) -> Action {
    let Some(pr) = project(path, agent.position) else {
        return Action::Noop;
    };
    match point_at(path, pr.arc_length + lookahead) {
        Some(target) if target != agent.position => law.steer(agent, target),
        _ => Action::Noop,
    }
}

pub fn waypoint_greedy(agent: &AgentState, w: &WaypointSet, law: &SteeringLaw) -> Action {
    match next_waypoint(agent, w) {
        Ok(target) => law.steer(agent, target),
        Err(_) => Action::Noop,
    }
}

/// Bang-bang steering on the hybrid vector alone.
pub fn hybrid_follower(vec: HybridVector, deadband_deg: f64) -> Action {
    if vec.theta_norm.abs() > deadband_deg / 180.0 {
        Action::Turn(STANDARD_ALPHA.copysign(vec.theta_norm))
    } else {
        Action::Noop
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurePursuit {
    pub lookahead: f64,
    pub law: SteeringLaw,
}

impl Default for PurePursuit {
    fn default() -> Self {
        Self {
            lookahead: DEFAULT_LOOKAHEAD,
            law: SteeringLaw::default(),
        }
    }
}

impl Policy for PurePursuit {
    fn name(&self) -> &'static str {
        "pursuit"
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, PolicyError> {
        Ok(pure_pursuit_path(obs.agent, obs.path, self.lookahead, &self.law))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointGreedy {
    pub law: SteeringLaw,
}

impl Default for WaypointGreedy {
    fn default() -> Self {
        Self {
            law: SteeringLaw {
                min_chord: GREEDY_MIN_CHORD,
                ..SteeringLaw::default()
            },
        }
    }
}

impl Policy for WaypointGreedy {
    fn name(&self) -> &'static str {
        "greedy"
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, PolicyError> {
        Ok(waypoint_greedy(obs.agent, obs.waypoints, &self.law))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridFollower {
    pub deadband_deg: f64,
}

impl Default for HybridFollower {
    fn default() -> Self {
        Self {
            deadband_deg: DEFAULT_DEADBAND,
        }
    }
}

impl Policy for HybridFollower {
    fn name(&self) -> &'static str {
        "hybrid"
    }

    fn act(&mut self, obs: &Observation<'_>) -> Result<Action, PolicyError> {
        Ok(obs.hybrid.map_or(Action::Noop, |v| hybrid_follower(v, self.deadband_deg)))
    }
}

/// Uniform over the standard action set.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_action(&mut self) -> Action {
        Action::STANDARD[self.rng.gen_range(0..Action::STANDARD.len())]
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn reset(&mut self) {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
    }

    fn act(&mut self, _obs: &Observation<'_>) -> Result<Action, PolicyError> {
        Ok(self.next_action())
    }
}

/// Always the same action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPolicy(pub Action);

impl Policy for FixedPolicy {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn act(&mut self, _obs: &Observation<'_>) -> Result<Action, PolicyError> {
        Ok(self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Pursuit,
    Greedy,
    Hybrid,
    Random,
    Remote,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Pursuit => "pursuit",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Hybrid => "hybrid",
            PolicyKind::Random => "random",
            PolicyKind::Remote => "remote",
        }
    }

    /// The privileged oracle that matches a guidance scheme.
    pub fn oracle_for(scheme: GuidanceScheme) -> PolicyKind {
        match scheme {
            GuidanceScheme::Path => PolicyKind::Pursuit,
            GuidanceScheme::Waypoints => PolicyKind::Greedy,
            GuidanceScheme::HybridVector => PolicyKind::Hybrid,
        }
    }

    /// Builds a local policy; `None` for `Remote`, which needs a connection.
    pub fn build(self, seed: u64) -> Option<Box<dyn Policy>> {
        match self {
            PolicyKind::Pursuit => Some(Box::new(PurePursuit::default())),
            PolicyKind::Greedy => Some(Box::new(WaypointGreedy::default())),
            PolicyKind::Hybrid => Some(Box::new(HybridFollower::default())),
            PolicyKind::Random => Some(Box::new(RandomPolicy::new(seed))),
            PolicyKind::Remote => None,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown policy `{0}` (expected pursuit, greedy, hybrid, random or remote)")]
pub struct UnknownPolicy(pub String);

impl FromStr for PolicyKind {
    type Err = UnknownPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pursuit" => Ok(PolicyKind::Pursuit),
            "greedy" => Ok(PolicyKind::Greedy),
            "hybrid" => Ok(PolicyKind::Hybrid),
            "random" => Ok(PolicyKind::Random),
            "remote" => Ok(PolicyKind::Remote),
            other => Err(UnknownPolicy(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::distance_to_polyline;

    use crate::world::step_dynamics;
    use proptest::prelude::*;

    fn east_path() -> Vec<Point> {
        vec![Point::new(0.0, 0.0), Point::new(1000.0, 0.0)]
    }

    #[test]
    fn pursuit_examples() {
        let law = SteeringLaw::default();
        let agent = AgentState::new(Point::new(0.0, 0.0), 0.0);
        assert_eq!(pure_pursuit_path(&agent, &east_path(), 6.0, &law), Action::Noop);
        // path runs north, i.e. 90 degrees to the left
        let north = [Point::new(0.0, 0.0), Point::new(0.0, 100.0)];
        assert_eq!(pure_pursuit_path(&agent, &north, 6.0, &law), Action::TURN_LEFT);
        // 2 degrees off lies inside the deadband
        let tilted = AgentState::new(Point::new(0.0, 0.0), 2.0);
        assert_eq!(pure_pursuit_path(&tilted, &east_path(), 6.0, &law), Action::Noop);
    }

    #[test]
    fn greedy_examples() {
        let law = SteeringLaw::default();
        let agent = AgentState::new(Point::new(0.0, 0.0), 0.0);
        let mut w = WaypointSet::from_targets(agent.position, &[Point::new(10.0, 0.0)]);
        assert_eq!(waypoint_greedy(&agent, &w, &law), Action::Noop);
        let left = WaypointSet::from_targets(agent.position, &[Point::new(0.0, 10.0)]);
        assert_eq!(waypoint_greedy(&agent, &left, &law), Action::TURN_LEFT);
        w.waypoints[0].collected = true;
        assert_eq!(waypoint_greedy(&agent, &w, &law), Action::Noop);
    }

    #[test]
    fn hybrid_examples() {
        let v = |t| HybridVector { r: 5.0, theta_norm: t };
        assert_eq!(hybrid_follower(v(0.0), 3.0), Action::Noop);
        assert_eq!(hybrid_follower(v(0.5), 3.0), Action::TURN_RIGHT);
        assert_eq!(hybrid_follower(v(-0.5), 3.0), Action::TURN_LEFT);
        assert_eq!(hybrid_follower(v(-0.01), 3.0), Action::Noop);
    }

    #[test]
    fn random_policy_is_seeded_and_uniform() {
        let draw = |seed| {
            let mut p = RandomPolicy::new(seed);
            (0..10_000).map(|_| p.next_action()).collect::<Vec<_>>()
        };
        let a = draw(7);
        assert_eq!(a, draw(7));
        assert_ne!(a, draw(8));
        for action in Action::STANDARD {
            let freq = a.iter().filter(|&&x| x == action).count() as f64 / a.len() as f64;
            assert!((freq - 1.0 / 3.0).abs() < 0.05, "{action:?}: {freq}");
        }
    }

    #[test]
    fn policy_names_parse() {
        for kind in [PolicyKind::Pursuit, PolicyKind::Greedy, PolicyKind::Hybrid, PolicyKind::Random, PolicyKind::Remote] {
            assert_eq!(kind.name().parse::<PolicyKind>(), Ok(kind));
        }
        assert!("sac".parse::<PolicyKind>().is_err());
        assert!(PolicyKind::Remote.build(0).is_none());
    }

    proptest! {
        #[test]
        fn pursuit_converges_on_straight_route(offset in -5.0f64..5.0, heading in -30.0f64..30.0) {
            let law = SteeringLaw::default();
            let path = east_path();
            let mut s = AgentState::new(Point::new(0.0, offset), heading);
            for _ in 0..200 {
                let a = pure_pursuit_path(&s, &path, DEFAULT_LOOKAHEAD, &law);
                prop_assert!(a.is_standard());
                s = step_dynamics(&s, a, &law.dynamics);
            }
            prop_assert!(distance_to_polyline(&path, s.position) <= 1.0);
        }
    }
}
