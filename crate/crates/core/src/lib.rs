//! Urban navigation simulator with virtual guidance.

pub mod detect;
pub mod envserver;
pub mod eval;
pub mod episode;
pub mod geom;
pub mod guidance;
pub mod maps;
pub mod planner;
pub mod policies;
pub mod render;
pub mod scenario;
pub mod world;
