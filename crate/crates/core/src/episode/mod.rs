//! The episode loop: plan, guide, render, act, step, reward, terminate.

mod metrics;
mod reward;

pub use metrics::{
    aggregate, line_following_rate, spl, waypoint_collecting_rate, EpisodeSummary, MetricsError,
    MetricsReport,
};
pub use reward::{
    goal_reward, nav_reward, RewardTerms, TerminalEvent, FAILURE_REWARD, GOAL_REWARD,
    LINE_REWARD_FLOOR, LINE_REWARD_MAX, OFF_LINE_REWARD, WAYPOINT_REWARD,
};

use crate::geom::{distance_to_polyline, polyline_length, Point};
use crate::guidance::{
    geometry_for, hybrid_vector, update_collection, GuidanceGeometry, GuidanceScheme, HybridVector,
    DEFAULT_COLLECTION_RADIUS,
};
use crate::planner::{
    extract_waypoints, plan_for_step, PlanError, PlanMode, PlannedPath, Planner, WaypointSet,
    DEFAULT_WAYPOINT_SPACING,
};
use crate::policies::{Policy, PolicyError};
use crate::render::{
    render_frame_supersampled, CameraModel, ObservationStack, RenderParams, Scene, SegFrame,
};
use crate::world::{step_dynamics, Action, AgentState, CityMap, DynamicsParams, Pedestrian, SemanticClass};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

/// Clearance used by the bundled scenarios so plans stay off the curb.
pub const DEFAULT_PLAN_CLEARANCE: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Collision,
    OutOfBound,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Success => "success",
            Outcome::Collision => "collision",
            Outcome::OutOfBound => "out_of_bound",
            Outcome::Timeout => "timeout",
        }
    }

    fn from_event(event: TerminalEvent) -> Option<Outcome> {
        match event {
            TerminalEvent::ReachedGoal => Some(Outcome::Success),
            TerminalEvent::Collision => Some(Outcome::Collision),
            TerminalEvent::OutOfBound => Some(Outcome::OutOfBound),
            TerminalEvent::Timeout => Some(Outcome::Timeout),
            TerminalEvent::None => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum EpisodeError {
    #[error("unknown route label {0:?}")]
    UnknownLabel(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("policy failed: {0}")]
    Policy(#[from] PolicyError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("episode already finished")]
    Done,
}

impl EpisodeError {
    pub fn code(&self) -> &'static str {
        match self {
            EpisodeError::UnknownLabel(_) => "UnknownLabel",
            EpisodeError::Plan(e) => e.code(),
            EpisodeError::Policy(_) => "PolicyError",
            EpisodeError::Config(_) => "BadConfig",
            EpisodeError::Done => "EpisodeDone",
        }
    }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    /// Start and destination labels from the map's named points.
    pub route: (String, String),
    pub scheme: GuidanceScheme,
    #[serde(with = "plan_mode_serde")]
    pub plan_mode: PlanMode,
    pub horizon: u64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub pedestrians: bool,
    pub pedestrian_speed_scale: f64,
    /// Randomize each pedestrian's starting phase from the seed.
    pub pedestrian_phase_jitter: bool,
    pub on_line_threshold: f64,
    pub goal_radius: f64,
    pub collision_radius: f64,
    pub collection_radius: f64,
    pub waypoint_spacing: f64,
    pub line_corridor: f64,
    pub plan_clearance: f64,
    /// Visible length of the path overlay ahead of the agent.
    pub path_window: Option<f64>,
    /// Initial heading in degrees; defaults to the first plan segment.
    pub start_heading: Option<f64>,
    pub speed: f64,
    pub dynamics: DynamicsParams,
    pub camera: CameraModel,
    pub render_params: RenderParams,
    pub supersample: usize,
    /// Render frames even when the policy does not read them.
    pub render: bool,
    /// Keep the per-step log in the result.
    pub record_steps: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            route: (String::new(), String::new()),
            scheme: GuidanceScheme::Path,
            plan_mode: PlanMode::OneTime,
            horizon: 3000,
            seed: 0,
            pedestrians: true,
            pedestrian_speed_scale: 1.0,
            pedestrian_phase_jitter: true,
            on_line_threshold: 3.0,
            goal_radius: 2.0,
            collision_radius: 0.5,
            collection_radius: DEFAULT_COLLECTION_RADIUS,
            waypoint_spacing: DEFAULT_WAYPOINT_SPACING,
            line_corridor: 2.0,
            plan_clearance: DEFAULT_PLAN_CLEARANCE,
            path_window: None,
            start_heading: None,
            speed: crate::world::DEFAULT_SPEED,
            dynamics: DynamicsParams::default(),
            camera: CameraModel::default(),
            render_params: RenderParams::default(),
            supersample: 1,
            render: false,
            record_steps: true,
        }
    }
}

mod plan_mode_serde {
    use super::PlanMode;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(mode: &PlanMode, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&mode.label())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<PlanMode, D::Error> {
        let text = String::deserialize(d)?;
        PlanMode::parse(&text).ok_or_else(|| D::Error::custom(format!("bad plan mode {text:?}")))
    }
}

impl EpisodeConfig {
    pub fn for_route(start: &str, dest: &str) -> Self {
        Self {
            route: (start.to_string(), dest.to_string()),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EpisodeError> {
        let bad = |m: &str| Err(EpisodeError::Config(m.to_string()));
        if self.horizon < 1 {
            return bad("horizon must be >= 1");
        }
        for (name, v) in [
            ("goal_radius", self.goal_radius),
            ("collision_radius", self.collision_radius),
            ("collection_radius", self.collection_radius),
            ("on_line_threshold", self.on_line_threshold),
            ("waypoint_spacing", self.waypoint_spacing),
            ("line_corridor", self.line_corridor),
            ("speed", self.speed),
            ("dt", self.dynamics.dt),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(&format!("{name} must be > 0"));
            }
        }
        if !(self.plan_clearance.is_finite() && self.plan_clearance >= 0.0) {
            return bad("plan_clearance must be >= 0");
        }
        if !(self.pedestrian_speed_scale.is_finite() && self.pedestrian_speed_scale >= 0.0) {
            return bad("pedestrian_speed_scale must be >= 0");
        }
        if let PlanMode::RealTime { period } = self.plan_mode {
            if period < 1 {
                return bad("real-time period must be >= 1");
            }
        }
        if self.supersample < 1 {
            return bad("supersample must be >= 1");
        }
        self.camera.validate().map_err(EpisodeError::Config)
    }
}

/// Everything a policy may look at before choosing an action.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub t: u64,
    pub scheme: GuidanceScheme,
    /// Present when frames are being rendered.
    pub frames: Option<&'a ObservationStack>,
    /// Absent once every waypoint is collected.
    pub hybrid: Option<HybridVector>,
    pub agent: &'a AgentState,
    /// The plan currently shown as guidance.
    pub path: &'a [Point],
    pub waypoints: &'a WaypointSet,
    /// Reward terms of the step that led here; zero at reset.
    pub reward: RewardTerms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: u64,
    pub action: Action,
    pub position: Point,
    pub heading: f64,
    pub omega: f64,
    pub d_prime: f64,
    pub newly_collected: usize,
    pub reward: RewardTerms,
    pub event: TerminalEvent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub map: String,
    pub start: String,
    pub dest: String,
    pub scheme: GuidanceScheme,
    pub plan_mode: String,
    pub seed: u64,
    pub outcome: Outcome,
    pub steps: u64,
    pub trajectory: Vec<Point>,
    pub cumulative_reward: f64,
    pub waypoints_collected: usize,
    pub waypoints_total: usize,
    pub initial_plan: PlannedPath,
    pub waypoints: Vec<Point>,
    pub replans: usize,
    pub line_following: f64,
    pub log: Vec<StepRecord>,
}

impl EpisodeResult {
    pub fn path_length(&self) -> f64 {
        polyline_length(&self.trajectory)
    }

    pub fn summary(&self) -> EpisodeSummary {
        EpisodeSummary {
            start: self.start.clone(),
            dest: self.dest.clone(),
            seed: self.seed,
            outcome: self.outcome,
            steps: self.steps,
            shortest_length: self.initial_plan.length,
            path_length: self.path_length(),
            reward: self.cumulative_reward,
            waypoints_collected: self.waypoints_collected,
            waypoints_total: self.waypoints_total,
            line_following: self.line_following,
        }
    }
}

/// Terminal event for the agent's current state; see [`TerminalEvent`] for
/// precedence.
pub fn check_termination(
    map: &CityMap,
    agent: &AgentState,
    pedestrians: &[(Point, f64)],
    dest: Point,
    config: &EpisodeConfig,
) -> TerminalEvent {
    if agent.position.distance(dest) <= config.goal_radius {
        return TerminalEvent::ReachedGoal;
    }
    let cell_class = map.query_class(agent.position);
    let hit_pedestrian = pedestrians
        .iter()
        .any(|&(p, r)| p.distance(agent.position) <= config.collision_radius + r);
    if hit_pedestrian || cell_class == SemanticClass::Building {
        return TerminalEvent::Collision;
    }
    if matches!(cell_class, SemanticClass::Sidewalk | SemanticClass::Void) {
        return TerminalEvent::OutOfBound;
    }
    if agent.t >= config.horizon {
        return TerminalEvent::Timeout;
    }
    TerminalEvent::None
}

/// A single episode that can be stepped from outside (the env server) or
/// driven by [`run_episode`].
pub struct Episode<'m> {
    map: &'m CityMap,
    planner: Planner<'m>,
    config: EpisodeConfig,
    start: Point,
    dest: Point,
    pedestrians: Vec<Pedestrian>,
    agent: AgentState,
    initial_plan: Arc<PlannedPath>,
    plan: Arc<PlannedPath>,
    replans: usize,
    waypoints: WaypointSet,
    geometry: GuidanceGeometry,
    stack: Option<ObservationStack>,
    render_frames: bool,
    trajectory: Vec<Point>,
    log: Vec<StepRecord>,
    cumulative: f64,
    last_reward: RewardTerms,
    outcome: Option<Outcome>,
}

impl<'m> Episode<'m> {
    pub fn new(map: &'m CityMap, config: EpisodeConfig, render_frames: bool) -> Result<Self, EpisodeError> {
        config.validate()?;
        let label = |l: &str| map.named_point(l).ok_or_else(|| EpisodeError::UnknownLabel(l.to_string()));
        let start = label(&config.route.0)?;
        let dest = label(&config.route.1)?;
        let planner = Planner::new(map, config.plan_clearance);
        let initial_plan = Arc::new(planner.plan(start, dest)?);
        let waypoints = extract_waypoints(&initial_plan, config.waypoint_spacing);

        let heading = config.start_heading.unwrap_or_else(|| {
            initial_plan
                .points
                .iter()
                .find(|p| p.distance(start) > 1e-9)
                .map_or(0.0, |p| (*p - start).bearing_deg())
        });
        let mut agent = AgentState::new(start, heading);
        agent.speed = config.speed;

        let pedestrians = if config.pedestrians {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            map.pedestrians()
                .iter()
                .map(|p| {
                    let mut p = p.clone();
                    p.speed *= config.pedestrian_speed_scale;
                    if config.pedestrian_phase_jitter {
                        p.phase += rng.gen_range(0.0..p.length().max(f64::MIN_POSITIVE));
                    }
                    p
                })
                .collect()
        } else {
            Vec::new()
        };

        let plan = match config.plan_mode {
            PlanMode::OneTime => Arc::clone(&initial_plan),
            PlanMode::RealTime { .. } => {
                plan_for_step(&planner, config.plan_mode, &agent, start, dest, None)?
            }
        };
        let render_frames = render_frames || config.render;
        let mut ep = Self {
            map,
            planner,
            start,
            dest,
            pedestrians,
            agent,
            initial_plan,
            plan,
            replans: 0,
            waypoints,
            geometry: GuidanceGeometry::empty(),
            stack: None,
            render_frames,
            trajectory: vec![start],
            log: Vec::new(),
            cumulative: 0.0,
            last_reward: RewardTerms::new(0.0, 0.0),
            outcome: None,
            config,
        };
        ep.refresh_geometry();
        if ep.render_frames {
            ep.stack = Some(ObservationStack::reset(ep.render_current()));
        }
        Ok(ep)
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn agent(&self) -> &AgentState {
        &self.agent
    }

    pub fn map(&self) -> &'m CityMap {
        self.map
    }

    pub fn destination(&self) -> Point {
        self.dest
    }

    pub fn plan(&self) -> &Arc<PlannedPath> {
        &self.plan
    }

    pub fn initial_plan(&self) -> &Arc<PlannedPath> {
        &self.initial_plan
    }

    pub fn waypoints(&self) -> &WaypointSet {
        &self.waypoints
    }

    pub fn geometry(&self) -> &GuidanceGeometry {
        &self.geometry
    }

    pub fn frames(&self) -> Option<&ObservationStack> {
        self.stack.as_ref()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn last_reward(&self) -> RewardTerms {
        self.last_reward
    }

    pub fn cumulative_reward(&self) -> f64 {
        self.cumulative
    }

    pub fn trajectory(&self) -> &[Point] {
        &self.trajectory
    }

    pub fn hybrid(&self) -> Option<HybridVector> {
        hybrid_vector(&self.agent, &self.waypoints).ok()
    }

    pub fn observation(&self) -> Observation<'_> {
        Observation {
            t: self.agent.t,
            scheme: self.config.scheme,
            frames: self.stack.as_ref(),
            hybrid: self.hybrid(),
            agent: &self.agent,
            path: &self.plan.points,
            waypoints: &self.waypoints,
            reward: self.last_reward,
        }
    }

    /// Pedestrian positions at the agent's current time.
    pub fn pedestrian_positions(&self) -> Vec<Point> {
        let seconds = self.agent.t as f64 * self.config.dynamics.dt;
        self.pedestrians.iter().map(|p| p.pose(seconds)).collect()
    }

    fn refresh_geometry(&mut self) {
        self.geometry = geometry_for(
            self.config.scheme,
            &self.agent,
            &self.plan.points,
            &self.waypoints,
            self.config.path_window,
        );
    }

    /// Renders the current view, with guidance overlay.
    pub fn render_current(&self) -> SegFrame {
        let peds = self.pedestrian_positions();
        let scene = Scene {
            map: self.map,
            pedestrians: &peds,
            geometry: &self.geometry,
        };
        render_frame_supersampled(
            &scene,
            &self.agent,
            &self.config.camera,
            &self.config.render_params,
            self.config.supersample,
        )
    }

    /// Applies one action and advances the world.
    pub fn step(&mut self, action: Action) -> Result<&StepRecord, EpisodeError> {
        if self.is_done() {
            return Err(EpisodeError::Done);
        }
        self.agent = step_dynamics(&self.agent, action, &self.config.dynamics);
        let newly = update_collection(&self.agent, &mut self.waypoints, self.config.collection_radius);

        let seconds = self.agent.t as f64 * self.config.dynamics.dt;
        let peds: Vec<(Point, f64)> = self
            .pedestrians
            .iter()
            .map(|p| (p.pose(seconds), p.radius))
            .collect();
        let event = check_termination(self.map, &self.agent, &peds, self.dest, &self.config);

        let d_prime = distance_to_polyline(&self.plan.points, self.agent.position);
        let on_line = d_prime <= self.config.on_line_threshold;
        let reward = RewardTerms::new(
            nav_reward(self.config.scheme, d_prime, newly, on_line),
            goal_reward(event),
        );
        self.cumulative += reward.total;
        self.last_reward = reward;
        self.trajectory.push(self.agent.position);

        self.outcome = Outcome::from_event(event);
        if self.outcome.is_none() {
            let plan = plan_for_step(
                &self.planner,
                self.config.plan_mode,
                &self.agent,
                self.start,
                self.dest,
                Some(&self.plan),
            )?;
            if !Arc::ptr_eq(&plan, &self.plan) {
                self.replans += 1;
                self.plan = plan;
            }
            self.refresh_geometry();
            if self.render_frames {
                let frame = self.render_current();
                if let Some(stack) = self.stack.as_mut() {
                    stack.push_frame(frame);
                }
            }
        }

        let record = StepRecord {
            t: self.agent.t,
            action,
            position: self.agent.position,
            heading: self.agent.heading,
            omega: self.agent.omega,
            d_prime,
            newly_collected: newly,
            reward,
            event,
        };
        if !self.config.record_steps {
            self.log.clear();
        }
        self.log.push(record);
        Ok(self.log.last().expect("just pushed"))
    }

    /// Consumes a finished (or abandoned) episode into its result.
    pub fn finish(self) -> EpisodeResult {
        let line_following = line_following_rate(
            &self.trajectory,
            &self.initial_plan.points,
            self.config.line_corridor,
        );
        EpisodeResult {
            map: self.map.name().to_string(),
            start: self.config.route.0.clone(),
            dest: self.config.route.1.clone(),
            scheme: self.config.scheme,
            plan_mode: self.config.plan_mode.label(),
            seed: self.config.seed,
            outcome: self.outcome.unwrap_or(Outcome::Timeout),
            steps: self.agent.t,
            cumulative_reward: self.cumulative,
            waypoints_collected: self.waypoints.collected_count(),
            waypoints_total: self.waypoints.len(),
            waypoints: self.waypoints.waypoints.iter().map(|w| w.point).collect(),
            initial_plan: (*self.initial_plan).clone(),
            replans: self.replans,
            line_following,
            trajectory: self.trajectory,
            log: if self.config.record_steps { self.log } else { Vec::new() },
        }
    }
}

/// Runs `policy` from reset to termination.
pub fn run_episode(
    policy: &mut dyn Policy,
    config: &EpisodeConfig,
    map: &CityMap,
) -> Result<EpisodeResult, EpisodeError> {
    let mut episode = Episode::new(map, config.clone(), policy.wants_frames())?;
    policy.reset();
    while !episode.is_done() {
        let action = policy.act(&episode.observation())?;
        episode.step(action)?;
    }
    Ok(episode.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::{FixedPolicy, PurePursuit};
    use crate::world::{Cell, RoadGraph};
    use std::collections::BTreeMap;

    /// Straight east-west road `len` cells long, 7 cells wide, sidewalks
    /// along both edges.
    fn straight_road(len: usize) -> CityMap {
        let h = 9;
        let mut classes = vec![SemanticClass::Road; len * h];
        for col in 0..len {
            classes[col] = SemanticClass::Sidewalk;
            classes[(h - 1) * len + col] = SemanticClass::Sidewalk;
        }
        let mut named = BTreeMap::new();
        named.insert("S".to_string(), Point::new(2.5, 0.5));
        named.insert("D".to_string(), Point::new(len as f64 - 2.5, 0.5));
        CityMap::new(
            "straight",
            1.0,
            len,
            h,
            Point::new(0.0, -4.0),
            classes,
            RoadGraph::default(),
            named,
            Vec::new(),
        )
        .unwrap()
    }

    fn config() -> EpisodeConfig {
        EpisodeConfig {
            plan_clearance: 0.0,
            ..EpisodeConfig::for_route("S", "D")
        }
    }

    #[test]
    fn pursuit_succeeds_on_straight_route() {
        let map = straight_road(120);
        let res = run_episode(&mut PurePursuit::default(), &config(), &map).unwrap();
        assert_eq!(res.outcome, Outcome::Success);
        assert!(res.line_following > 0.99);
        assert_eq!(res.waypoints_collected, res.waypoints_total);
        let sum: f64 = res.log.iter().map(|r| r.reward.total).sum();
        assert_eq!(sum, res.cumulative_reward);
        assert_eq!(res.trajectory.len() as u64, res.steps + 1);
    }

    #[test]
    fn stationary_policy_times_out() {
        let map = straight_road(2000);
        let mut cfg = config();
        cfg.horizon = 100;
        let res = run_episode(&mut FixedPolicy(Action::Noop), &cfg, &map).unwrap();
        assert_eq!(res.outcome, Outcome::Timeout);
        assert_eq!(res.steps, 100);
        assert_eq!(res.log.last().unwrap().reward.r_goal, -10.0);
    }

    #[test]
    fn spawn_next_to_pedestrian_collides_on_first_step() {
        let map = straight_road(120).with_pedestrians(vec![Pedestrian {
            path: vec![Point::new(3.0, 0.5), Point::new(3.0, 0.6)],
            closed: false,
            speed: 0.0,
            radius: 0.3,
            phase: 0.0,
        }])
        .unwrap();
        let mut cfg = config();
        cfg.pedestrian_phase_jitter = false;
        let res = run_episode(&mut FixedPolicy(Action::Noop), &cfg, &map).unwrap();
        assert_eq!(res.outcome, Outcome::Collision);
        assert_eq!(res.steps, 1);
    }

    #[test]
    fn termination_precedence() {
        let map = straight_road(40);
        let cfg = EpisodeConfig {
            horizon: 5,
            ..config()
        };
        let dest = Point::new(20.5, 0.5);
        let mut agent = AgentState::new(dest, 0.0);
        agent.t = 10;
        let peds = [(dest, 0.3)];
        assert_eq!(check_termination(&map, &agent, &peds, dest, &cfg), TerminalEvent::ReachedGoal);
        agent.position = Point::new(10.5, 0.5);
        assert_eq!(check_termination(&map, &agent, &[(agent.position, 0.3)], dest, &cfg), TerminalEvent::Collision);
        agent.position = Point::new(10.5, -3.5);
        assert_eq!(check_termination(&map, &agent, &[], dest, &cfg), TerminalEvent::OutOfBound);
        agent.position = Point::new(10.5, 50.0);
        assert_eq!(check_termination(&map, &agent, &[], dest, &cfg), TerminalEvent::OutOfBound);
        agent.position = Point::new(10.5, 0.5);
        assert_eq!(check_termination(&map, &agent, &[], dest, &cfg), TerminalEvent::Timeout);
        agent.t = 4;
        assert_eq!(check_termination(&map, &agent, &[], dest, &cfg), TerminalEvent::None);
        assert_eq!(map.class_of_cell(Cell { col: 0, row: 0 }), SemanticClass::Sidewalk);
    }

    #[test]
    fn step_after_terminal_is_rejected() {
        let map = straight_road(40);
        let mut cfg = config();
        cfg.horizon = 1;
        let mut ep = Episode::new(&map, cfg, true).unwrap();
        assert_eq!(ep.frames().unwrap().to_bytes().len(), crate::render::STACK_BYTES);
        ep.step(Action::Noop).unwrap();
        assert!(ep.is_done());
        assert!(matches!(ep.step(Action::Noop), Err(EpisodeError::Done)));
    }

    #[test]
    fn unknown_label_and_bad_config() {
        let map = straight_road(40);
        let cfg = EpisodeConfig::for_route("S", "nowhere");
        assert!(matches!(Episode::new(&map, cfg, false), Err(EpisodeError::UnknownLabel(_))));
        let cfg = EpisodeConfig {
            horizon: 0,
            ..config()
        };
        assert!(matches!(Episode::new(&map, cfg, false), Err(EpisodeError::Config(_))));
    }

    #[test]
    fn config_json_round_trip() {
        let mut cfg = config();
        cfg.plan_mode = PlanMode::RealTime { period: 5 };
        cfg.scheme = GuidanceScheme::HybridVector;
        let text = serde_json::to_string(&cfg).unwrap();
        let back: EpisodeConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: EpisodeConfig = serde_json::from_str(r#"{"route":["A","B"],"plan_mode":"real-time"}"#).unwrap();
        assert_eq!(partial.plan_mode, PlanMode::RealTime { period: 1 });
        assert!(serde_json::from_str::<EpisodeConfig>(r#"{"bogus":1}"#).is_err());
    }
}
