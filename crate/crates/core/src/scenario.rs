//! Route sets for batch evaluation.

use crate::world::CityMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario `{0}` has no routes")]
    Empty(String),
    #[error("scenario `{set}` route {index} uses unknown label {label:?}")]
    UnknownLabel {
        set: String,
        index: usize,
        label: String,
    },
    #[error("unknown scenario set `{0}` (bundled: seen, unseen, seen89)")]
    Unknown(String),
    #[error("episodes_per_route must be >= 1")]
    NoEpisodes,
    #[error("cannot read scenario file: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub name: String,
    pub routes: Vec<(String, String)>,
    #[serde(default = "one")]
    pub episodes_per_route: usize,
    #[serde(default)]
    pub pedestrians: bool,
}

fn one() -> usize {
    1
}

const SEEN: [(&str, &str); 20] = [
    ("N1", "S1"),
    ("N1", "S2"),
    ("N2", "E1"),
    ("W1", "E2"),
    ("S3", "N4"),
    ("M1", "C3"),
    ("C1", "E1"),
    ("W2", "S4"),
    ("N3", "W1"),
    ("E2", "S1"),
    ("M4", "M3"),
    ("C2", "N4"),
    ("S2", "M6"),
    ("E1", "N2"),
    ("W1", "C4"),
    ("M5", "S3"),
    ("N4", "W2"),
    ("C3", "M2"),
    ("S4", "N1"),
    ("M6", "C1"),
];

const UNSEEN: [(&str, &str); 4] = [("W2", "E1"), ("S1", "C4"), ("N2", "M3"), ("E2", "C2")];

fn owned(routes: &[(&str, &str)]) -> Vec<(String, String)> {
    routes
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

impl ScenarioSet {
    pub fn new(name: &str, routes: Vec<(String, String)>) -> Self {
        Self {
            name: name.to_string(),
            routes,
            episodes_per_route: 1,
            pedestrians: false,
        }
    }

    /// `seen` (20 routes), `unseen` (4 routes) or `seen89`, all on `city8`.
    pub fn bundled(name: &str) -> Result<Self, ScenarioError> {
        match name {
            "seen" => Ok(Self::new("seen", owned(&SEEN))),
            "unseen" => Ok(Self::new("unseen", owned(&UNSEEN))),
            "seen89" => Ok(Self::new("seen89", large_set())),
            other => Err(ScenarioError::Unknown(other.to_string())),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    /// A bundled name, or a path to a JSON scenario file.
    pub fn resolve(spec: &str) -> Result<Self, ScenarioError> {
        match Self::bundled(spec) {
            Ok(set) => Ok(set),
            Err(_) if std::path::Path::new(spec).is_file() => {
                Self::from_json(&std::fs::read_to_string(spec)?)
            }
            Err(e) => Err(e),
        }
    }

    pub fn validate(&self, map: &CityMap) -> Result<(), ScenarioError> {
        if self.routes.is_empty() {
            return Err(ScenarioError::Empty(self.name.clone()));
        }
        if self.episodes_per_route == 0 {
            return Err(ScenarioError::NoEpisodes);
        }
        for (index, (a, b)) in self.routes.iter().enumerate() {
            for label in [a, b] {
                if map.named_point(label).is_none() {
                    return Err(ScenarioError::UnknownLabel {
                        set: self.name.clone(),
                        index,
                        label: label.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// `(route index, repetition)` pairs in evaluation order.
    pub fn jobs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.routes.len()).flat_map(move |r| (0..self.episodes_per_route).map(move |k| (r, k)))
    }
}

/// 89 ordered pairs of city8 labels, taken at a fixed stride from all
/// ordered pairs that are not in the unseen set.
fn large_set() -> Vec<(String, String)> {
    let labels: Vec<String> = crate::maps::build_city8()
        .named_points()
        .keys()
        .cloned()
        .collect();
    let unseen = owned(&UNSEEN);
    let mut out = Vec::new();
    let mut n = 0usize;
    for a in &labels {
        for b in &labels {
            if a == b || unseen.contains(&(a.clone(), b.clone())) {
                continue;
            }
            if n.is_multiple_of(5) && out.len() < 89 {
                out.push((a.clone(), b.clone()));
            }
            n += 1;
        }
    }
    out
}
