//! Guidance schemes derived from a plan: the path overlay, waypoint
//! spheres, and the polar `(r, theta)` vector used by the hybrid baseline.

use crate::geom::{polyline_length, project, slice, Point};
use crate::planner::WaypointSet;
use crate::world::AgentState;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub const DEFAULT_COLLECTION_RADIUS: f64 = 2.0;
pub const SPHERE_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GuidanceError {
    #[error("every waypoint has been collected")]
    AllCollected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuidanceScheme {
    Path,
    Waypoints,
    #[serde(rename = "hybrid")]
    HybridVector,
}

impl GuidanceScheme {
    pub fn name(self) -> &'static str {
        match self {
            GuidanceScheme::Path => "path",
            GuidanceScheme::Waypoints => "waypoints",
            GuidanceScheme::HybridVector => "hybrid",
        }
    }
}

impl fmt::Display for GuidanceScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown guidance scheme `{0}` (expected path, waypoints or hybrid)")]
pub struct UnknownScheme(pub String);

impl FromStr for GuidanceScheme {
    type Err = UnknownScheme;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "path" => Ok(GuidanceScheme::Path),
            "waypoints" => Ok(GuidanceScheme::Waypoints),
            "hybrid" => Ok(GuidanceScheme::HybridVector),
            other => Err(UnknownScheme(other.to_string())),
        }
    }
}

/// Polar guidance to the next waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridVector {
    /// Meters.
    pub r: f64,
    /// Bearing error / 180, positive when the waypoint is to the right.
    pub theta_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sphere {
    pub center: Point,
    pub radius: f64,
}

/// What the overlay carries; matches the populated geometry fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlayKind {
    Path,
    Waypoints,
    PathAndWaypoints,
    Empty,
}

/// World-space geometry to be drawn into observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceGeometry {
    pub kind: OverlayKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<Point>>,
    #[serde(default)]
    pub spheres: Vec<Sphere>,
}

impl GuidanceGeometry {
    pub fn empty() -> Self {
        Self {
            kind: OverlayKind::Empty,
            path: None,
            spheres: Vec::new(),
        }
    }

    pub fn path(points: Vec<Point>) -> Self {
        Self {
            kind: OverlayKind::Path,
            path: Some(points),
            spheres: Vec::new(),
        }
    }

    pub fn spheres(centers: impl IntoIterator<Item = Point>) -> Self {
        Self {
            kind: OverlayKind::Waypoints,
            path: None,
            spheres: centers
                .into_iter()
                .map(|center| Sphere {
                    center,
                    radius: SPHERE_RADIUS,
                })
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_none() && self.spheres.is_empty()
    }

    /// True when the populated fields agree with `kind`.
    pub fn is_consistent(&self) -> bool {
        match self.kind {
            OverlayKind::Path => self.path.is_some() && self.spheres.is_empty(),
            OverlayKind::Waypoints => self.path.is_none(),
            OverlayKind::PathAndWaypoints => self.path.is_some(),
            OverlayKind::Empty => self.is_empty(),
        }
    }
}

/// Arc length of the agent's projection onto the waypoint path.
fn agent_arc(agent: &AgentState, w: &WaypointSet) -> f64 {
    project(&w.path, agent.position).map_or(0.0, |p| p.arc_length)
}

/// The closest forthcoming waypoint: the uncollected waypoint with the
/// smallest arc length at or ahead of the agent's projection on the path.
/// Falls back to the furthest uncollected one when all are behind.
pub fn next_waypoint(agent: &AgentState, w: &WaypointSet) -> Result<Point, GuidanceError> {
    let s = agent_arc(agent, w);
    w.uncollected()
        .find(|wp| wp.arc_length >= s - 1e-9)
        .or_else(|| w.uncollected().last())
        .map(|wp| wp.point)
        .ok_or(GuidanceError::AllCollected)
}

pub fn hybrid_vector(agent: &AgentState, w: &WaypointSet) -> Result<HybridVector, GuidanceError> {
    let target = next_waypoint(agent, w)?;
    let r = agent.position.distance(target);
    let theta = if r == 0.0 { 0.0 } else { agent.bearing_error(target) };
    Ok(HybridVector {
        r,
        theta_norm: theta / 180.0,
    })
}

/// Marks every uncollected waypoint within `radius` of the agent. Returns
/// how many were newly collected.
pub fn update_collection(agent: &AgentState, w: &mut WaypointSet, radius: f64) -> usize {
    debug_assert!(radius > 0.0);
    let mut newly = 0;
    for wp in w.waypoints.iter_mut().filter(|wp| !wp.collected) {
        if wp.point.distance(agent.position) <= radius {
            wp.collected = true;
            newly += 1;
        }
    }
    newly
}

/// Overlay for the active scheme.
///
/// For `Path` the polyline runs from the agent's projection to the end of
/// `path`, cut to `window` meters when given.
pub fn geometry_for(
    scheme: GuidanceScheme,
    agent: &AgentState,
    path: &[Point],
    w: &WaypointSet,
    window: Option<f64>,
) -> GuidanceGeometry {
    match scheme {
        GuidanceScheme::HybridVector => GuidanceGeometry::empty(),
        GuidanceScheme::Waypoints => GuidanceGeometry::spheres(w.uncollected().map(|wp| wp.point)),
        GuidanceScheme::Path => {
            if path.len() < 2 {
                return GuidanceGeometry::path(path.to_vec());
            }
            let from = project(path, agent.position).map_or(0.0, |p| p.arc_length);
            let to = window.map_or(polyline_length(path), |len| from + len.max(0.0));
            GuidanceGeometry::path(slice(path, from, to))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{extract_waypoints, PlannedPath};
    use proptest::prelude::*;

    fn straight(len: f64) -> WaypointSet {
        let path = PlannedPath {
            points: vec![Point::new(0.0, 0.0), Point::new(len, 0.0)],
            length: len,
            cardinal_moves: 0,
            diagonal_moves: 0,
        };
        extract_waypoints(&path, 10.0)
    }

    #[test]
    fn next_waypoint_by_arc_length() {
        let w = straight(40.0);
        let agent = AgentState::new(Point::new(0.0, 0.0), 0.0);
        assert_eq!(next_waypoint(&agent, &w), Ok(Point::new(10.0, 0.0)));
        // between waypoints 2 (20 m) and 3 (30 m), offset from the path
        let agent = AgentState::new(Point::new(24.0, 3.0), 90.0);
        assert_eq!(next_waypoint(&agent, &w), Ok(Point::new(30.0, 0.0)));
    }

    #[test]
    fn next_waypoint_skips_collected_and_errors_when_done() {
        let mut w = straight(30.0);
        let agent = AgentState::new(Point::new(0.0, 0.0), 0.0);
        w.waypoints[0].collected = true;
        w.waypoints[1].collected = true;
        assert_eq!(next_waypoint(&agent, &w), Ok(Point::new(30.0, 0.0)));
        w.waypoints[2].collected = true;
        assert_eq!(next_waypoint(&agent, &w), Err(GuidanceError::AllCollected));
        assert_eq!(hybrid_vector(&agent, &w), Err(GuidanceError::AllCollected));
    }

    #[test]
    fn hybrid_vector_conventions() {
        let w = WaypointSet::from_targets(Point::new(0.0, 0.0), &[Point::new(5.0, 0.0)]);
        let agent = AgentState::new(Point::new(0.0, 0.0), 0.0);
        assert_eq!(hybrid_vector(&agent, &w).unwrap(), HybridVector { r: 5.0, theta_norm: 0.0 });

        let left = WaypointSet::from_targets(Point::new(0.0, 0.0), &[Point::new(0.0, 5.0)]);
        assert_eq!(hybrid_vector(&agent, &left).unwrap().theta_norm, -0.5);
        let right = WaypointSet::from_targets(Point::new(0.0, 0.0), &[Point::new(0.0, -5.0)]);
        assert_eq!(hybrid_vector(&agent, &right).unwrap().theta_norm, 0.5);

        let on_top = WaypointSet::from_targets(Point::new(0.0, 0.0), &[Point::new(0.0, 0.0)]);
        assert_eq!(hybrid_vector(&agent, &on_top).unwrap(), HybridVector { r: 0.0, theta_norm: 0.0 });
    }

    #[test]
    fn collection_radius_rules() {
        let mut w = WaypointSet::from_targets(
            Point::new(0.0, 0.0),
            &[Point::new(10.0, 0.0), Point::new(10.0, 2.0), Point::new(50.0, 0.0)],
        );
        let far = AgentState::new(Point::new(30.0, 0.0), 0.0);
        let before = w.clone();
        assert_eq!(update_collection(&far, &mut w, 2.0), 0);
        assert_eq!(w, before);

        let near = AgentState::new(Point::new(10.0, 1.0), 0.0);
        assert_eq!(update_collection(&near, &mut w, 2.0), 2);
        assert_eq!(w.collected_count(), 2);
        // collected ones are not counted again
        assert_eq!(update_collection(&near, &mut w, 2.0), 0);

        let mut single = WaypointSet::from_targets(Point::new(0.0, 0.0), &[Point::new(10.0, 0.0)]);
        let close = AgentState::new(Point::new(10.1, 0.0), 0.0);
        assert_eq!(update_collection(&close, &mut single, 2.0), 1);
    }

    #[test]
    fn geometry_matches_scheme() {
        let w = straight(30.0);
        let agent = AgentState::new(Point::new(0.0, 0.0), 0.0);
        let path = w.path.clone();
        let hybrid = geometry_for(GuidanceScheme::HybridVector, &agent, &path, &w, None);
        assert!(hybrid.is_empty());
        let spheres = geometry_for(GuidanceScheme::Waypoints, &agent, &path, &w, None);
        assert_eq!(spheres.spheres.len(), 3);
        assert!(spheres.is_consistent());
        let mid = AgentState::new(Point::new(12.0, 1.0), 0.0);
        let line = geometry_for(GuidanceScheme::Path, &mid, &path, &w, None);
        assert_eq!(line.path, Some(vec![Point::new(12.0, 0.0), Point::new(30.0, 0.0)]));
        let windowed = geometry_for(GuidanceScheme::Path, &mid, &path, &w, Some(5.0));
        assert_eq!(windowed.path, Some(vec![Point::new(12.0, 0.0), Point::new(17.0, 0.0)]));
    }

    #[test]
    fn scheme_names_parse() {
        for s in [GuidanceScheme::Path, GuidanceScheme::Waypoints, GuidanceScheme::HybridVector] {
            assert_eq!(s.name().parse::<GuidanceScheme>(), Ok(s));
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
        assert!("vector".parse::<GuidanceScheme>().is_err());
    }

    proptest! {
        #[test]
        fn theta_norm_bounded_and_rotation_shifts_it(
            x in -50.0f64..50.0, y in -50.0f64..50.0,
            heading in -180.0f64..180.0, delta in -360.0f64..360.0,
        ) {
            let target = Point::new(7.0, -3.0);
            prop_assume!(Point::new(x, y).distance(target) > 1e-6);
            let w = WaypointSet::from_targets(Point::new(x, y), &[target]);
            let a = AgentState::new(Point::new(x, y), heading);
            let v = hybrid_vector(&a, &w).unwrap();
            prop_assert!((-1.0..1.0).contains(&v.theta_norm));
            // rotating the agent right by delta lowers theta by delta/180
            let b = AgentState::new(Point::new(x, y), heading - delta);
            let vb = hybrid_vector(&b, &w).unwrap();
            let expected = crate::geom::wrap_deg(v.theta_norm * 180.0 - delta) / 180.0;
            let diff = crate::geom::wrap_deg((vb.theta_norm - expected) * 180.0).abs() / 180.0;
            prop_assert!(diff <= 1e-9);
        }

        #[test]
        fn spheres_plus_collected_is_total(steps in proptest::collection::vec((0.0f64..40.0, -3.0f64..3.0), 0..30)) {
            let mut w = straight(40.0);
            let total = w.len();
            let mut last = 0;
            for (x, y) in steps {
                let agent = AgentState::new(Point::new(x, y), 0.0);
                update_collection(&agent, &mut w, 2.0);
                let g = geometry_for(GuidanceScheme::Waypoints, &agent, &w.path, &w, None);
                prop_assert_eq!(g.spheres.len() + w.collected_count(), total);
                prop_assert!(w.collected_count() >= last);
                last = w.collected_count();
            }
        }
    }
}
