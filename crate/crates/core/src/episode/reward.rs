use crate::guidance::GuidanceScheme;
use serde::{Deserialize, Serialize};

pub const WAYPOINT_REWARD: f64 = 5.0;
pub const GOAL_REWARD: f64 = 10.0;
pub const FAILURE_REWARD: f64 = -10.0;
pub const OFF_LINE_REWARD: f64 = -0.2;
pub const LINE_REWARD_MAX: f64 = 6.0;
pub const LINE_REWARD_FLOOR: f64 = 0.4;

/// Event detected after a step, in precedence order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalEvent {
    ReachedGoal,
    Collision,
    OutOfBound,
    Timeout,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardTerms {
    pub r_nav: f64,
    pub r_goal: f64,
    pub total: f64,
}

impl RewardTerms {
    pub fn new(r_nav: f64, r_goal: f64) -> Self {
        Self {
            r_nav,
            r_goal,
            total: r_nav + r_goal,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.total == self.r_nav + self.r_goal
    }
}

/// Guidance-following reward for one step.
///
/// Path scheme: `clamp(6 - d', 0.4, 6)` while on the line, `-0.2` otherwise.
/// Waypoint-based schemes: 5 per waypoint collected this step.
pub fn nav_reward(scheme: GuidanceScheme, d_prime: f64, newly_collected: usize, on_line: bool) -> f64 {
    match scheme {
        GuidanceScheme::Path => {
            if on_line {
                (LINE_REWARD_MAX - d_prime).clamp(LINE_REWARD_FLOOR, LINE_REWARD_MAX)
            } else {
                OFF_LINE_REWARD
            }
        }
        GuidanceScheme::Waypoints | GuidanceScheme::HybridVector => {
            WAYPOINT_REWARD * newly_collected as f64
        }
    }
}

pub fn goal_reward(event: TerminalEvent) -> f64 {
    match event {
        TerminalEvent::ReachedGoal => GOAL_REWARD,
        TerminalEvent::Collision | TerminalEvent::OutOfBound | TerminalEvent::Timeout => FAILURE_REWARD,
        TerminalEvent::None => 0.0,
    }
}
