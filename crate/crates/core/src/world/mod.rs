//! Static city map, pedestrians and agent kinematics.

mod class;
mod dynamics;
mod map;
mod pedestrian;

pub use class::SemanticClass;
pub use dynamics::{
    step_dynamics, Action, AgentState, DynamicsParams, DEFAULT_DT, DEFAULT_KAPPA, DEFAULT_OMEGA_MAX,
    DEFAULT_SPEED, STANDARD_ALPHA,
};
pub use map::{
    load_map, Bounds, Cell, CityMap, ClassGrid, MapError, MapFile, NodeKind, RoadGraph, RoadNode,
    MAP_VERSION,
};
pub use pedestrian::Pedestrian;
