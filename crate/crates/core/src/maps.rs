//! Bundled maps and map lookup.

use crate::geom::Point;
use crate::world::{
    load_map, CityMap, MapError, NodeKind, Pedestrian, RoadGraph, RoadNode, SemanticClass,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CITY8_JSON: &str = include_str!("../maps/city8.json");

/// Environment variable holding extra map directories (`:`-separated).
pub const MAP_DIR_ENV: &str = "VG_MAP_DIR";

const CS: f64 = 2.0;
const SIZE: f64 = 400.0;
const ROAD_HALF: f64 = 10.0;
const SIDEWALK: f64 = 4.0;
const VERTICAL_X: [f64; 4] = [50.0, 150.0, 250.0, 350.0];
const HORIZONTAL_Y: [f64; 2] = [120.0, 280.0];
const VERTICAL_SPAN: (f64, f64) = (30.0, 370.0);
const HORIZONTAL_SPAN: (f64, f64) = (10.0, 390.0);

struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn grow(&self, d: f64) -> Rect {
        Rect {
            x0: self.x0 - d,
            y0: self.y0 - d,
            x1: self.x1 + d,
            y1: self.y1 + d,
        }
    }

    fn contains(&self, p: Point) -> bool {
        p.x >= self.x0 && p.x < self.x1 && p.y >= self.y0 && p.y < self.y1
    }
}

fn road_rects() -> Vec<Rect> {
    let mut rects = Vec::new();
    for x in VERTICAL_X {
        rects.push(Rect {
            x0: x - ROAD_HALF,
            y0: VERTICAL_SPAN.0,
            x1: x + ROAD_HALF,
            y1: VERTICAL_SPAN.1,
        });
    }
    for y in HORIZONTAL_Y {
        rects.push(Rect {
            x0: HORIZONTAL_SPAN.0,
            y0: y - ROAD_HALF,
            x1: HORIZONTAL_SPAN.1,
            y1: y + ROAD_HALF,
        });
    }
    rects
}

/// Center of the cell just north-east of a world grid corner.
fn at(x: f64, y: f64) -> Point {
    Point::new(x + CS / 2.0, y + CS / 2.0)
}

fn road_graph() -> RoadGraph {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let node = |id: String, kind, pos| RoadNode { id, kind, pos };
    for (i, x) in VERTICAL_X.iter().enumerate() {
        for (j, y) in HORIZONTAL_Y.iter().enumerate() {
            nodes.push(node(format!("I{}{}", i + 1, j + 1), NodeKind::Intersection, at(*x, *y)));
        }
        let south = format!("VS{}", i + 1);
        let north = format!("VN{}", i + 1);
        nodes.push(node(south.clone(), NodeKind::End, at(*x, VERTICAL_SPAN.0)));
        nodes.push(node(north.clone(), NodeKind::End, at(*x, VERTICAL_SPAN.1 - CS)));
        edges.push((south, format!("I{}1", i + 1)));
        edges.push((format!("I{}1", i + 1), format!("I{}2", i + 1)));
        edges.push((format!("I{}2", i + 1), north));
    }
    for (j, y) in HORIZONTAL_Y.iter().enumerate() {
        let west = format!("HW{}", j + 1);
        let east = format!("HE{}", j + 1);
        nodes.push(node(west.clone(), NodeKind::End, at(HORIZONTAL_SPAN.0, *y)));
        nodes.push(node(east.clone(), NodeKind::End, at(HORIZONTAL_SPAN.1 - CS, *y)));
        let mut chain = vec![west];
        chain.extend((1..=VERTICAL_X.len()).map(|i| format!("I{i}{}", j + 1)));
        chain.push(east);
        for w in chain.windows(2) {
            edges.push((w[0].clone(), w[1].clone()));
        }
    }
    RoadGraph { nodes, edges }
}

fn named_points() -> BTreeMap<String, Point> {
    let mut named = BTreeMap::new();
    for (i, x) in VERTICAL_X.iter().enumerate() {
        named.insert(format!("N{}", i + 1), at(*x, 360.0));
        named.insert(format!("S{}", i + 1), at(*x, 38.0));
        named.insert(format!("C{}", i + 1), at(*x, 200.0));
    }
    for (j, y) in HORIZONTAL_Y.iter().enumerate() {
        named.insert(format!("W{}", j + 1), at(18.0, *y));
        named.insert(format!("E{}", j + 1), at(380.0, *y));
        for (k, x) in [100.0, 200.0, 300.0].iter().enumerate() {
            named.insert(format!("M{}", 3 * j + k + 1), at(*x, *y));
        }
    }
    named
}

fn pedestrians() -> Vec<Pedestrian> {
    let mut peds = Vec::new();
    // One crosswalk per intersection, alternating between the north and
    // south approach of the vertical road.
    for (i, x) in VERTICAL_X.iter().enumerate() {
        for (j, y) in HORIZONTAL_Y.iter().enumerate() {
            let offset = if (i + j) % 2 == 0 { 16.0 } else { -16.0 };
            let cy = y + offset;
            peds.push(Pedestrian {
                path: vec![
                    Point::new(x - ROAD_HALF - 2.0, cy),
                    Point::new(x + ROAD_HALF + 2.0, cy),
                ],
                closed: false,
                speed: 1.2,
                radius: 0.3,
                phase: 0.0,
            });
        }
    }
    // Sidewalk loops around the three middle blocks.
    for w in VERTICAL_X.windows(2) {
        let (x0, x1) = (w[0] + ROAD_HALF + 2.0, w[1] - ROAD_HALF - 2.0);
        let (y0, y1) = (HORIZONTAL_Y[0] + ROAD_HALF + 2.0, HORIZONTAL_Y[1] - ROAD_HALF - 2.0);
        peds.push(Pedestrian {
            path: vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            closed: true,
            speed: 1.0,
            radius: 0.3,
            phase: 0.0,
        });
    }
    peds
}

/// Builds the bundled `city8` map: four north-south and two east-west
/// roads (20 m wide, 4 m sidewalks) crossing at eight intersections, with
/// buildings filling the blocks.
pub fn build_city8() -> CityMap {
    let n = (SIZE / CS) as usize;
    let roads = road_rects();
    let walks: Vec<Rect> = roads.iter().map(|r| r.grow(SIDEWALK)).collect();
    let mut classes = Vec::with_capacity(n * n);
    for row in 0..n {
        for col in 0..n {
            let c = Point::new((col as f64 + 0.5) * CS, (row as f64 + 0.5) * CS);
            let class = if roads.iter().any(|r| r.contains(c)) {
                SemanticClass::Road
            } else if walks.iter().any(|r| r.contains(c)) {
                SemanticClass::Sidewalk
            } else {
                SemanticClass::Building
            };
            classes.push(class);
        }
    }
    CityMap::new(
        "city8",
        CS,
        n,
        n,
        Point::new(0.0, 0.0),
        classes,
        road_graph(),
        named_points(),
        pedestrians(),
    )
    .expect("city8 is valid")
}

pub fn bundled_names() -> &'static [&'static str] {
    &["city8"]
}

pub fn bundled(name: &str) -> Option<Result<CityMap, MapError>> {
    match name {
        "city8" => Some(CityMap::from_json(CITY8_JSON)),
        _ => None,
    }
}

/// Resolves a map argument: an existing file path, then `<name>.json` in each
/// directory of `search`, then a bundled map name.
pub fn resolve_map(spec: &str, search: &[PathBuf]) -> Result<CityMap, MapError> {
    let direct = Path::new(spec);
    if direct.is_file() {
        return load_map(direct);
    }
    for dir in search {
        for candidate in [dir.join(spec), dir.join(format!("{spec}.json"))] {
            if candidate.is_file() {
                return load_map(&candidate);
            }
        }
    }
    bundled(spec).unwrap_or_else(|| Err(MapError::NotFound(spec.to_string())))
}

/// Directories listed in `VG_MAP_DIR`.
pub fn search_path_from_env() -> Vec<PathBuf> {
    std::env::var_os(MAP_DIR_ENV)
        .map(|v| std::env::split_paths(&v).collect())
        .unwrap_or_default()
}
