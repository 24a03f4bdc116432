//! Turns detector output and a text mission into guidance targets.
//!
//! Detections are read from `vgdet/1` JSON. Box coordinates are pixel edges:
//! a box covering pixel columns 10..=19 has `x_min = 10`, `x_max = 20`.

use crate::geom::Point;
use crate::guidance::{GuidanceGeometry, GuidanceScheme};
use crate::render::{ground_point, CameraModel};
use crate::world::AgentState;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub const DETECTION_FORMAT: &str = "vgdet/1";

/// Distance at which a mission target counts as reached, meters.
pub const DEFAULT_REACH_RADIUS: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("unsupported detection format {0:?}, expected \"vgdet/1\"")]
    Format(String),
    #[error("detection {index} ({label:?}): {reason}")]
    InvalidDetection {
        index: usize,
        label: String,
        reason: String,
    },
    #[error("invalid camera: {0}")]
    Camera(String),
    #[error("box for {0:?} does not touch the ground below the horizon")]
    NoGroundIntersection(String),
    #[error("mission label {0:?} was not detected")]
    UnknownLabel(String),
    #[error("empty mission")]
    EmptyMission,
    #[error("mission mixes `&` and `|`; use one operator")]
    MixedOperators,
    #[error("detection file parse error: {0}")]
    Parse(String),
}

impl DetectError {
    pub fn code(&self) -> &'static str {
        match self {
            DetectError::Format(_) => "DetectFormat",
            DetectError::InvalidDetection { .. } => "InvalidDetection",
            DetectError::Camera(_) => "BadCamera",
            DetectError::NoGroundIntersection(_) => "NoGroundIntersection",
            DetectError::UnknownLabel(_) => "UnknownLabel",
            DetectError::EmptyMission => "EmptyMission",
            DetectError::MixedOperators => "MixedOperators",
            DetectError::Parse(_) => "DetectParse",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    /// `[x_min, y_min, x_max, y_max]` in pixel-edge coordinates.
    pub bbox: [f64; 4],
    pub score: f64,
}

/// Agent pose when the image was taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Pose {
    pub position: Point,
    pub heading: f64,
}

impl Default for Pose {
    fn default() -> Self {
        Self {
            position: Point::new(0.0, 0.0),
            heading: 0.0,
        }
    }
}

impl Pose {
    pub fn agent(&self) -> AgentState {
        AgentState::new(self.position, self.heading)
    }
}

/// Contents of a `vgdet/1` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionFile {
    pub format: String,
    #[serde(default)]
    pub camera: CameraModel,
    #[serde(default)]
    pub pose: Pose,
    pub detections: Vec<Detection>,
}

impl DetectionFile {
    pub fn from_json(text: &str) -> Result<Self, DetectError> {
        let file: DetectionFile =
            serde_json::from_str(text).map_err(|e| DetectError::Parse(e.to_string()))?;
        if file.format != DETECTION_FORMAT {
            return Err(DetectError::Format(file.format));
        }
        file.camera.validate().map_err(DetectError::Camera)?;
        for (index, d) in file.detections.iter().enumerate() {
            d.validate(&file.camera)
                .map_err(|reason| DetectError::InvalidDetection {
                    index,
                    label: d.label.clone(),
                    reason,
                })?;
        }
        Ok(file)
    }
}

/// Lowercase, single-spaced form used to match mission labels.
pub fn normalize_label(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

impl Detection {
    pub fn validate(&self, cam: &CameraModel) -> Result<(), String> {
        let [x0, y0, x1, y1] = self.bbox;
        if normalize_label(&self.label).is_empty() {
            return Err("empty label".into());
        }
        if !self.bbox.iter().all(|v| v.is_finite()) {
            return Err("box coordinates must be finite".into());
        }
        if !(x0 < x1 && y0 < y1) {
            return Err("box must have x_min < x_max and y_min < y_max".into());
        }
        if x0 < 0.0 || y0 < 0.0 || x1 > cam.image_width as f64 || y1 > cam.image_height as f64 {
            return Err("box extends past the image".into());
        }
        if !(0.0..=1.0).contains(&self.score) {
            return Err("score must be in [0, 1]".into());
        }
        Ok(())
    }

    /// Bottom-center of the box as a continuous pixel position `(row, col)`
    /// in the renderer's pixel-center convention.
    pub fn footpoint(&self) -> (f64, f64) {
        let [x0, _, x1, y1] = self.bbox;
        (y1 - 0.5, (x0 + x1) / 2.0 - 0.5)
    }
}

/// Ground position of every detected label, keeping the highest-scoring
/// box per label (the first one on ties).
pub fn detections_to_waypoints(
    detections: &[Detection],
    cam: &CameraModel,
    pose: &Pose,
) -> Result<BTreeMap<String, Point>, DetectError> {
    let mut best: BTreeMap<String, &Detection> = BTreeMap::new();
    for d in detections {
        let key = normalize_label(&d.label);
        match best.get(&key) {
            Some(b) if b.score >= d.score => {}
            _ => {
                best.insert(key, d);
            }
        }
    }
    let agent = pose.agent();
    best.into_iter()
        .map(|(label, d)| {
            let (row, col) = d.footpoint();
            ground_point(cam, &agent, row, col)
                .map(|p| (label.clone(), p))
                .ok_or(DetectError::NoGroundIntersection(label))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", content = "labels", rename_all = "snake_case")]
pub enum Mission {
    /// Reach every label, in order.
    All(Vec<String>),
    /// Reach the nearest one.
    Any(Vec<String>),
}

impl Mission {
    /// Parses `a & b & c` or `a | b`. Braces and quote marks around the
    /// expression or its labels are ignored.
    pub fn parse(text: &str) -> Result<Self, DetectError> {
        let body = text.trim().trim_start_matches('{').trim_end_matches('}');
        let has_all = body.contains('&');
        let has_any = body.contains('|');
        if has_all && has_any {
            return Err(DetectError::MixedOperators);
        }
        let sep = if has_any { '|' } else { '&' };
        let quotes: &[char] = &['\'', '"', '`'];
        let labels: Vec<String> = body
            .split(sep)
            .map(|l| normalize_label(l.trim().trim_matches(quotes)))
            .collect();
        if labels.iter().any(String::is_empty) {
            return Err(DetectError::EmptyMission);
        }
        Ok(if has_any {
            Mission::Any(labels)
        } else {
            Mission::All(labels)
        })
    }

    pub fn labels(&self) -> &[String] {
        match self {
            Mission::All(l) | Mission::Any(l) => l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub label: String,
    pub point: Point,
}

/// Ordered target list for a mission. `Any` picks the resolved label nearest
/// to `from`, earliest in the prompt on ties.
pub fn compose_mission(
    mission: &Mission,
    resolved: &BTreeMap<String, Point>,
    from: Point,
) -> Result<Vec<Target>, DetectError> {
    let lookup = |l: &String| {
        resolved.get(l).map(|&point| Target {
            label: l.clone(),
            point,
        })
    };
    match mission {
        Mission::All(labels) => labels
            .iter()
            .map(|l| lookup(l).ok_or_else(|| DetectError::UnknownLabel(l.clone())))
            .collect(),
        Mission::Any(labels) => {
            let mut best: Option<Target> = None;
            for t in labels.iter().filter_map(lookup) {
                if best
                    .as_ref()
                    .is_none_or(|b| t.point.distance(from) < b.point.distance(from))
                {
                    best = Some(t);
                }
            }
            best.map(|t| vec![t])
                .ok_or_else(|| DetectError::UnknownLabel(labels.join(" | ")))
        }
    }
}

/// Progress through a target list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionTracker {
    pub targets: Vec<Target>,
    pub reached: usize,
    pub radius: f64,
}

impl MissionTracker {
    pub fn new(targets: Vec<Target>) -> Self {
        Self {
            targets,
            reached: 0,
            radius: DEFAULT_REACH_RADIUS,
        }
    }

    pub fn current(&self) -> Option<&Target> {
        self.targets.get(self.reached)
    }

    pub fn is_complete(&self) -> bool {
        self.reached >= self.targets.len()
    }

    /// Advances past the current target when the agent is within reach.
    /// Returns whether a target was reached.
    pub fn update(&mut self, agent: Point) -> bool {
        match self.current() {
            Some(t) if t.point.distance(agent) <= self.radius => {
                self.reached += 1;
                true
            }
            _ => false,
        }
    }

    /// Spheres on the remaining targets, or a straight ribbon from the agent
    /// to the current one.
    pub fn geometry(&self, scheme: GuidanceScheme, agent: Point) -> GuidanceGeometry {
        let remaining = &self.targets[self.reached.min(self.targets.len())..];
        if remaining.is_empty() {
            return GuidanceGeometry::empty();
        }
        match scheme {
            GuidanceScheme::Waypoints => GuidanceGeometry::spheres(remaining.iter().map(|t| t.point)),
            GuidanceScheme::Path => GuidanceGeometry::path(vec![agent, remaining[0].point]),
            GuidanceScheme::HybridVector => GuidanceGeometry::empty(),
        }
    }
}
