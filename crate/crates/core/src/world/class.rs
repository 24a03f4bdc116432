use serde::{Deserialize, Serialize};
use std::fmt;

/// Semantic label carried by map cells and rendered pixels.
///
/// The discriminant is the on-wire class id (one byte per pixel).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum SemanticClass {
    Void = 0,
    Road = 1,
    Sidewalk = 2,
    Building = 3,
    Pedestrian = 4,
    GuidancePath = 5,
    WaypointMarker = 6,
    Agent = 7,
}

impl SemanticClass {
    pub const ALL: [SemanticClass; 8] = [
        SemanticClass::Void,
        SemanticClass::Road,
        SemanticClass::Sidewalk,
        SemanticClass::Building,
        SemanticClass::Pedestrian,
        SemanticClass::GuidancePath,
        SemanticClass::WaypointMarker,
        SemanticClass::Agent,
    ];

    pub const COUNT: usize = Self::ALL.len();

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            SemanticClass::Void => "void",
            SemanticClass::Road => "road",
            SemanticClass::Sidewalk => "sidewalk",
            SemanticClass::Building => "building",
            SemanticClass::Pedestrian => "pedestrian",
            SemanticClass::GuidancePath => "guidance_path",
            SemanticClass::WaypointMarker => "waypoint_marker",
            SemanticClass::Agent => "agent",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.name() == name)
    }

    /// Display color. Scene classes follow the Cityscapes palette.
    pub fn color(self) -> [u8; 3] {
        match self {
            SemanticClass::Void => [0, 0, 0],
            SemanticClass::Road => [128, 64, 128],
            SemanticClass::Sidewalk => [244, 35, 232],
            SemanticClass::Building => [70, 70, 70],
            SemanticClass::Pedestrian => [220, 20, 60],
            SemanticClass::GuidancePath => [0, 255, 255],
            SemanticClass::WaypointMarker => [255, 215, 0],
            SemanticClass::Agent => [0, 0, 142],
        }
    }

    pub fn from_color(rgb: [u8; 3]) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.color() == rgb)
    }

    /// Classes a static map cell may hold.
    pub fn is_static_scene(self) -> bool {
        matches!(
            self,
            SemanticClass::Void | SemanticClass::Road | SemanticClass::Sidewalk | SemanticClass::Building
        )
    }

    pub fn is_overlay(self) -> bool {
        matches!(self, SemanticClass::GuidancePath | SemanticClass::WaypointMarker)
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
