//! Static city map and its `vgmap/1` JSON file format.

use super::class::SemanticClass;
use super::pedestrian::Pedestrian;
use crate::geom::Point;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

pub const MAP_VERSION: &str = "vgmap/1";

#[derive(Debug, Error)]
pub enum MapError {
    #[error("cannot read map {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("map parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid map field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("no map file or bundled map named {0:?}")]
    NotFound(String),
}

impl MapError {
    pub fn code(&self) -> &'static str {
        match self {
            MapError::Io { .. } => "MapIo",
            MapError::Parse(_) => "MapParse",
            MapError::Invalid { .. } => "MapInvalid",
            MapError::NotFound(_) => "MapNotFound",
        }
    }

    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        MapError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Integer cell coordinate: `col` along +x, `row` along +y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Intersection,
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNode {
    pub id: String,
    pub kind: NodeKind,
    pub pos: Point,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoadGraph {
    pub nodes: Vec<RoadNode>,
    /// Road segments as pairs of node ids.
    pub edges: Vec<(String, String)>,
}

impl RoadGraph {
    pub fn intersection_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Intersection)
            .count()
    }

    pub fn node(&self, id: &str) -> Option<&RoadNode> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

/// Axis-aligned world rectangle, half-open on the max side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: Point,
    pub max: Point,
}

impl Bounds {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x < self.max.x && p.y >= self.min.y && p.y < self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// Validated city map. Cells own half-open intervals `[x, x + cell_size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CityMap {
    name: String,
    cell_size: f64,
    width: usize,
    height: usize,
    origin: Point,
    classes: Vec<SemanticClass>,
    road_graph: RoadGraph,
    named_points: BTreeMap<String, Point>,
    pedestrians: Vec<Pedestrian>,
}

/// Cell classes as stored on disk: one name per cell or run-length pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClassGrid {
    Dense(Vec<SemanticClass>),
    Rle { rle: Vec<(SemanticClass, usize)> },
}

impl ClassGrid {
    pub fn encode_rle(classes: &[SemanticClass]) -> Self {
        let mut rle: Vec<(SemanticClass, usize)> = Vec::new();
        for &c in classes {
            match rle.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => rle.push((c, 1)),
            }
        }
        ClassGrid::Rle { rle }
    }

    fn decode(&self) -> Vec<SemanticClass> {
        match self {
            ClassGrid::Dense(v) => v.clone(),
            ClassGrid::Rle { rle } => rle
                .iter()
                .flat_map(|&(c, n)| std::iter::repeat_n(c, n))
                .collect(),
        }
    }
}

/// On-disk representation of a map (`vgmap/1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub version: String,
    #[serde(default)]
    pub name: String,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    #[serde(default)]
    pub origin: Point,
    /// Row-major, row 0 at `origin.y`.
    pub classes: ClassGrid,
    #[serde(default)]
    pub road_graph: RoadGraph,
    #[serde(default)]
    pub named_points: BTreeMap<String, Point>,
    #[serde(default)]
    pub pedestrians: Vec<Pedestrian>,
}

impl CityMap {
    pub fn from_file(file: MapFile) -> Result<Self, MapError> {
        if file.version != MAP_VERSION {
            return Err(MapError::invalid(
                "version",
                format!("expected {MAP_VERSION}, found {}", file.version),
            ));
        }
        if !(file.cell_size.is_finite() && file.cell_size > 0.0) {
            return Err(MapError::invalid("cell_size", "must be a positive number"));
        }
        if file.width == 0 || file.height == 0 {
            return Err(MapError::invalid("width", "width * height must be positive"));
        }
        if !file.origin.is_finite() {
            return Err(MapError::invalid("origin", "must be finite"));
        }
        let classes = file.classes.decode();
        let expected = file.width * file.height;
        if classes.len() != expected {
            return Err(MapError::invalid(
                "classes",
                format!("expected {expected} cells, found {}", classes.len()),
            ));
        }
        if let Some((i, c)) = classes
            .iter()
            .enumerate()
            .find(|(_, c)| !c.is_static_scene())
        {
            return Err(MapError::invalid(
                "classes",
                format!("cell {i} holds non-scene class `{c}`"),
            ));
        }
        let map = CityMap {
            name: file.name,
            cell_size: file.cell_size,
            width: file.width,
            height: file.height,
            origin: file.origin,
            classes,
            road_graph: file.road_graph,
            named_points: file.named_points,
            pedestrians: file.pedestrians,
        };
        map.validate()?;
        Ok(map)
    }

    fn validate(&self) -> Result<(), MapError> {
        for (label, &p) in &self.named_points {
            if self.query_class(p) != SemanticClass::Road {
                return Err(MapError::invalid(
                    format!("named_points.{label}"),
                    format!("({}, {}) is on {}, not road", p.x, p.y, self.query_class(p)),
                ));
            }
        }
        let mut ids = std::collections::HashSet::new();
        for node in &self.road_graph.nodes {
            if !ids.insert(node.id.as_str()) {
                return Err(MapError::invalid(
                    "road_graph.nodes",
                    format!("duplicate node id `{}`", node.id),
                ));
            }
        }
        for (a, b) in &self.road_graph.edges {
            for id in [a, b] {
                let node = self.road_graph.node(id).ok_or_else(|| {
                    MapError::invalid("road_graph.edges", format!("unknown node `{id}`"))
                })?;
                if self.query_class(node.pos) != SemanticClass::Road {
                    return Err(MapError::invalid(
                        format!("road_graph.nodes.{id}"),
                        "edge endpoint is not on a road cell",
                    ));
                }
            }
        }
        for (i, ped) in self.pedestrians.iter().enumerate() {
            ped.validate()
                .map_err(|reason| MapError::invalid(format!("pedestrians[{i}]"), reason))?;
        }
        Ok(())
    }

    pub fn to_file(&self) -> MapFile {
        MapFile {
            version: MAP_VERSION.to_string(),
            name: self.name.clone(),
            cell_size: self.cell_size,
            width: self.width,
            height: self.height,
            origin: self.origin,
            classes: ClassGrid::encode_rle(&self.classes),
            road_graph: self.road_graph.clone(),
            named_points: self.named_points.clone(),
            pedestrians: self.pedestrians.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("map serializes")
    }

    /// Builds a map from raw parts, applying the same validation as `load_map`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        cell_size: f64,
        width: usize,
        height: usize,
        origin: Point,
        classes: Vec<SemanticClass>,
        road_graph: RoadGraph,
        named_points: BTreeMap<String, Point>,
        pedestrians: Vec<Pedestrian>,
    ) -> Result<Self, MapError> {
        Self::from_file(MapFile {
            version: MAP_VERSION.into(),
            name: name.into(),
            cell_size,
            width,
            height,
            origin,
            classes: ClassGrid::Dense(classes),
            road_graph,
            named_points,
            pedestrians,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn bounds(&self) -> Bounds {
        Bounds {
            min: self.origin,
            max: Point::new(
                self.origin.x + self.width as f64 * self.cell_size,
                self.origin.y + self.height as f64 * self.cell_size,
            ),
        }
    }

    pub fn road_graph(&self) -> &RoadGraph {
        &self.road_graph
    }

    pub fn named_points(&self) -> &BTreeMap<String, Point> {
        &self.named_points
    }

    pub fn named_point(&self, label: &str) -> Option<Point> {
        self.named_points.get(label).copied()
    }

    pub fn pedestrians(&self) -> &[Pedestrian] {
        &self.pedestrians
    }

    pub fn cell_index(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_at_index(&self, index: usize) -> Cell {
        Cell {
            col: index % self.width,
            row: index / self.width,
        }
    }

    /// Cell containing `p`, or `None` outside the map.
    pub fn cell_of(&self, p: Point) -> Option<Cell> {
        let gx = ((p.x - self.origin.x) / self.cell_size).floor();
        let gy = ((p.y - self.origin.y) / self.cell_size).floor();
        if gx < 0.0 || gy < 0.0 || gx >= self.width as f64 || gy >= self.height as f64 {
            return None;
        }
        Some(Cell {
            col: gx as usize,
            row: gy as usize,
        })
    }

    pub fn cell_center(&self, cell: Cell) -> Point {
        Point::new(
            self.origin.x + (cell.col as f64 + 0.5) * self.cell_size,
            self.origin.y + (cell.row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn class_of_cell(&self, cell: Cell) -> SemanticClass {
        self.classes[self.cell_index(cell)]
    }

    /// Class at `p`; `Void` outside the map bounds.
    pub fn query_class(&self, p: Point) -> SemanticClass {
        self.cell_of(p)
            .map_or(SemanticClass::Void, |c| self.class_of_cell(c))
    }

    pub fn classes(&self) -> &[SemanticClass] {
        &self.classes
    }

    pub fn with_pedestrians(mut self, pedestrians: Vec<Pedestrian>) -> Result<Self, MapError> {
        self.pedestrians = pedestrians;
        self.validate()?;
        Ok(self)
    }
}

/// Loads and validates a `vgmap/1` file.
pub fn load_map(path: impl AsRef<Path>) -> Result<CityMap, MapError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| MapError::Io {
        path: path.display().to_string(),
        source,
    })?;
    CityMap::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(classes: Vec<SemanticClass>, w: usize, h: usize) -> CityMap {
        CityMap::new("t", 2.0, w, h, Point::default(), classes, RoadGraph::default(), BTreeMap::new(), vec![])
            .unwrap()
    }

    #[test]
    fn trivial_single_road_cell() {
        let text = r#"{"version":"vgmap/1","cell_size":1.0,"width":1,"height":1,"classes":["road"]}"#;
        let map = CityMap::from_json(text).unwrap();
        assert_eq!(map.query_class(Point::new(0.5, 0.5)), SemanticClass::Road);
        assert_eq!(map.bounds().max, Point::new(1.0, 1.0));
    }

    #[test]
    fn named_point_on_building_is_rejected() {
        let text = r#"{"version":"vgmap/1","cell_size":1.0,"width":2,"height":1,
            "classes":{"rle":[["road",1],["building",1]]},
            "named_points":{"A":[1.5,0.5]}}"#;
        match CityMap::from_json(text) {
            Err(MapError::Invalid { field, .. }) => assert_eq!(field, "named_points.A"),
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_dimensions_and_versions() {
        let bad = [
            r#"{"version":"vgmap/2","cell_size":1.0,"width":1,"height":1,"classes":["road"]}"#,
            r#"{"version":"vgmap/1","cell_size":0.0,"width":1,"height":1,"classes":["road"]}"#,
            r#"{"version":"vgmap/1","cell_size":1.0,"width":0,"height":1,"classes":[]}"#,
            r#"{"version":"vgmap/1","cell_size":1.0,"width":2,"height":1,"classes":["road"]}"#,
            r#"{"version":"vgmap/1","cell_size":1.0,"width":1,"height":1,"classes":["pedestrian"]}"#,
        ];
        for text in bad {
            assert!(matches!(CityMap::from_json(text), Err(MapError::Invalid { .. })), "{text}");
        }
        assert!(matches!(CityMap::from_json("{"), Err(MapError::Parse(_))));
    }

    #[test]
    fn edge_endpoints_must_be_on_road() {
        let text = r#"{"version":"vgmap/1","cell_size":1.0,"width":2,"height":1,
            "classes":["road","sidewalk"],
            "road_graph":{"nodes":[{"id":"a","kind":"end","pos":[0.5,0.5]},{"id":"b","kind":"end","pos":[1.5,0.5]}],
                          "edges":[["a","b"]]}}"#;
        assert!(matches!(CityMap::from_json(text), Err(MapError::Invalid { .. })));
    }

    #[test]
    fn query_class_half_open_cells() {
        use SemanticClass::*;
        let map = tiny(vec![Road, Building, Sidewalk, Road], 2, 2);
        assert_eq!(map.query_class(Point::new(1.0, 1.0)), Road);
        // x = 2.0 is the left edge of cell 1
        assert_eq!(map.query_class(Point::new(2.0, 1.0)), Building);
        assert_eq!(map.query_class(Point::new(1.999_999, 1.0)), Road);
        assert_eq!(map.query_class(Point::new(1.0, 2.0)), Sidewalk);
        assert_eq!(map.query_class(Point::new(4.0, 1.0)), Void);
        assert_eq!(map.query_class(Point::new(-1.0, 1.0)), Void);
        assert_eq!(map.query_class(Point::new(1.0, 5.0)), Void);
    }

    #[test]
    fn json_round_trip_preserves_map() {
        use SemanticClass::*;
        let map = tiny(vec![Road, Road, Sidewalk, Building, Road, Void], 3, 2);
        let back = CityMap::from_json(&map.to_json()).unwrap();
        assert_eq!(back, map);
    }
}
