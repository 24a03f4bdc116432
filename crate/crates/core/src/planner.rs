//! A* planning over road cells and waypoint extraction.
//!
//! The search runs on the 8-connected cell lattice. Cardinal moves cost one
//! cell, diagonal moves `sqrt(2)` cells, and a diagonal move is only allowed
//! when both cardinal cells it squeezes past are traversable. The octile
//! heuristic is consistent for this move set, so the first expansion of the
//! goal is optimal. Ties on `f` go to the smaller heuristic, then to the
//! smaller cell index.

use crate::geom::{point_at, polyline_length, Point};
use crate::world::{AgentState, Cell, CityMap, SemanticClass};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use thiserror::Error;

pub const DEFAULT_WAYPOINT_SPACING: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("no road cell within snapping range of ({x}, {y})")]
    OffRoad { x: f64, y: f64 },
    #[error("destination is unreachable over road cells")]
    NoPath,
}

impl PlanError {
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::OffRoad { .. } => "OffRoad",
            PlanError::NoPath => "NoPath",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedPath {
    /// Cell centers from the start to the destination, collinear vertices removed.
    pub points: Vec<Point>,
    /// Meters, the sum of segment lengths.
    pub length: f64,
    pub cardinal_moves: u32,
    pub diagonal_moves: u32,
}

impl PlannedPath {
    pub fn start(&self) -> Point {
        self.points[0]
    }

    pub fn end(&self) -> Point {
        *self.points.last().expect("path is never empty")
    }

    /// Lattice cost in cells, `cardinal + sqrt(2) * diagonal`.
    pub fn cell_cost(&self) -> f64 {
        self.cardinal_moves as f64 + self.diagonal_moves as f64 * std::f64::consts::SQRT_2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlanMode {
    OneTime,
    /// Replan from the agent position whenever `t % period == 0`.
    RealTime { period: u32 },
}

impl PlanMode {
    pub fn parse(text: &str) -> Option<PlanMode> {
        match text {
            "one-time" | "onetime" | "one_time" => Some(PlanMode::OneTime),
            "real-time" | "realtime" | "real_time" => Some(PlanMode::RealTime { period: 1 }),
            _ => {
                let rest = text
                    .strip_prefix("real-time:")
                    .or_else(|| text.strip_prefix("realtime:"))?;
                rest.parse()
                    .ok()
                    .filter(|&p| p >= 1)
                    .map(|period| PlanMode::RealTime { period })
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            PlanMode::OneTime => "one-time".into(),
            PlanMode::RealTime { period: 1 } => "real-time".into(),
            PlanMode::RealTime { period } => format!("real-time:{period}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    f: f64,
    h: f64,
    index: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Reversed so BinaryHeap pops the smallest (f, h, index).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// Result of a lattice search, before conversion to world points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRoute {
    pub cells: Vec<Cell>,
    pub cardinal_moves: u32,
    pub diagonal_moves: u32,
}

/// Planner bound to one map with a precomputed traversability mask.
///
/// With `clearance > 0`, road cells whose center lies closer than
/// `clearance` meters to a non-road cell (or the map edge) are excluded,
/// which keeps plans away from curbs. Snapping then reaches
/// `clearance + cell_size` meters instead of one cell.
#[derive(Debug, Clone)]
pub struct Planner<'m> {
    map: &'m CityMap,
    clearance: f64,
    free: Vec<bool>,
}

impl<'m> Planner<'m> {
    pub fn new(map: &'m CityMap, clearance: f64) -> Self {
        let clearance = clearance.max(0.0);
        let free = traversable_mask(map, clearance);
        Self {
            map,
            clearance,
            free,
        }
    }

    pub fn map(&self) -> &'m CityMap {
        self.map
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.free[self.map.cell_index(cell)]
    }

    /// Nearest traversable cell center within snapping range of `p`.
    pub fn snap(&self, p: Point) -> Result<Cell, PlanError> {
        let map = self.map;
        let cs = map.cell_size();
        let reach = cs + self.clearance;
        let radius_cells = (reach / cs).ceil() as i64;
        let gx = ((p.x - map.origin().x) / cs).floor() as i64;
        let gy = ((p.y - map.origin().y) / cs).floor() as i64;
        let mut best: Option<(f64, usize)> = None;
        for dy in -radius_cells..=radius_cells {
            for dx in -radius_cells..=radius_cells {
                let (cx, cy) = (gx + dx, gy + dy);
                if cx < 0 || cy < 0 || cx >= map.width() as i64 || cy >= map.height() as i64 {
                    continue;
                }
                let cell = Cell {
                    col: cx as usize,
                    row: cy as usize,
                };
                if !self.is_free(cell) {
                    continue;
                }
                // The point's own cell and its 8 neighbours are always in range.
                let d = map.cell_center(cell).distance(p);
                if dx.abs().max(dy.abs()) > 1 && d > reach {
                    continue;
                }
                let idx = map.cell_index(cell);
                if best.is_none_or(|(bd, bi)| d < bd || (d == bd && idx < bi)) {
                    best = Some((d, idx));
                }
            }
        }
        best.map(|(_, idx)| map.cell_at_index(idx))
            .ok_or(PlanError::OffRoad { x: p.x, y: p.y })
    }

    /// Shortest route between two traversable cells.
    pub fn search(&self, start: Cell, goal: Cell) -> Option<CellRoute> {
        let map = self.map;
        let (w, h) = (map.width() as i64, map.height() as i64);
        let n = map.width() * map.height();
        let start_i = map.cell_index(start);
        let goal_i = map.cell_index(goal);
        if !self.free[start_i] || !self.free[goal_i] {
            return None;
        }
        let heuristic = |i: usize| {
            let c = map.cell_at_index(i);
            let dx = c.col.abs_diff(goal.col) as f64;
            let dy = c.row.abs_diff(goal.row) as f64;
            let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
            (hi - lo) + lo * std::f64::consts::SQRT_2
        };
        let cost = |card: u32, diag: u32| card as f64 + diag as f64 * std::f64::consts::SQRT_2;

        let mut moves: Vec<Option<(u32, u32)>> = vec![None; n];
        let mut parent = vec![usize::MAX; n];
        let mut closed = vec![false; n];
        let mut open = BinaryHeap::new();
        moves[start_i] = Some((0, 0));
        let h0 = heuristic(start_i);
        open.push(Frontier {
            f: h0,
            h: h0,
            index: start_i,
        });

        while let Some(Frontier { index, .. }) = open.pop() {
            if closed[index] {
                continue;
            }
            closed[index] = true;
            if index == goal_i {
                break;
            }
            let (card, diag) = moves[index].expect("opened nodes have costs");
            let c = map.cell_at_index(index);
            for (dx, dy) in NEIGHBORS {
                let (nx, ny) = (c.col as i64 + dx, c.row as i64 + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let ni = (ny * w + nx) as usize;
                if !self.free[ni] || closed[ni] {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal {
                    let side_a = (c.row as i64 * w + nx) as usize;
                    let side_b = (ny * w + c.col as i64) as usize;
                    if !self.free[side_a] || !self.free[side_b] {
                        continue;
                    }
                }
                let next = if diagonal { (card, diag + 1) } else { (card + 1, diag) };
                let g = cost(next.0, next.1);
                if moves[ni].is_none_or(|(a, b)| g < cost(a, b)) {
                    moves[ni] = Some(next);
                    parent[ni] = index;
                    let hn = heuristic(ni);
                    open.push(Frontier {
                        f: g + hn,
                        h: hn,
                        index: ni,
                    });
                }
            }
        }

        if !closed[goal_i] {
            return None;
        }
        let mut cells = vec![goal];
        let mut cur = goal_i;
        while cur != start_i {
            cur = parent[cur];
            cells.push(map.cell_at_index(cur));
        }
        cells.reverse();
        let (cardinal_moves, diagonal_moves) = moves[goal_i].expect("goal reached");
        Some(CellRoute {
            cells,
            cardinal_moves,
            diagonal_moves,
        })
    }

    pub fn plan(&self, from: Point, to: Point) -> Result<PlannedPath, PlanError> {
        let start = self.snap(from)?;
        let goal = self.snap(to)?;
        let route = self.search(start, goal).ok_or(PlanError::NoPath)?;
        let points = simplify(&route.cells)
            .into_iter()
            .map(|c| self.map.cell_center(c))
            .collect::<Vec<_>>();
        Ok(PlannedPath {
            length: polyline_length(&points),
            points,
            cardinal_moves: route.cardinal_moves,
            diagonal_moves: route.diagonal_moves,
        })
    }
}

fn traversable_mask(map: &CityMap, clearance: f64) -> Vec<bool> {
    let road: Vec<bool> = map
        .classes()
        .iter()
        .map(|&c| c == SemanticClass::Road)
        .collect();
    if clearance == 0.0 {
        return road;
    }
    let cs = map.cell_size();
    let reach = (clearance / cs).ceil() as i64 + 1;
    let (w, h) = (map.width() as i64, map.height() as i64);
    let mut free = road.clone();
    for row in 0..h {
        for col in 0..w {
            let i = (row * w + col) as usize;
            if !road[i] {
                continue;
            }
            'scan: for dy in -reach..=reach {
                for dx in -reach..=reach {
                    let (x, y) = (col + dx, row + dy);
                    let blocked = x < 0 || y < 0 || x >= w || y >= h || !road[(y * w + x) as usize];
                    if !blocked {
                        continue;
                    }
                    // distance from this cell's center to the blocking cell's square
                    let gap_x = (dx.abs() as f64 - 0.5).max(0.0) * cs;
                    let gap_y = (dy.abs() as f64 - 0.5).max(0.0) * cs;
                    if gap_x.hypot(gap_y) < clearance {
                        free[i] = false;
                        break 'scan;
                    }
                }
            }
        }
    }
    free
}

/// Drops interior cells where the step direction does not change.
fn simplify(cells: &[Cell]) -> Vec<Cell> {
    if cells.len() <= 2 {
        return cells.to_vec();
    }
    let dir = |a: Cell, b: Cell| (b.col as i64 - a.col as i64, b.row as i64 - a.row as i64);
    let mut out = vec![cells[0]];
    for i in 1..cells.len() - 1 {
        if dir(cells[i - 1], cells[i]) != dir(cells[i], cells[i + 1]) {
            out.push(cells[i]);
        }
    }
    out.push(*cells.last().unwrap());
    out
}

/// Plans on the raw road mask (no clearance).
pub fn plan(map: &CityMap, from: Point, to: Point) -> Result<PlannedPath, PlanError> {
    Planner::new(map, 0.0).plan(from, to)
}

/// Chooses the plan to use at the agent's current step.
///
/// Returns the cached plan unchanged (same allocation) when no replan is due.
pub fn plan_for_step(
    planner: &Planner<'_>,
    mode: PlanMode,
    agent: &AgentState,
    start: Point,
    dest: Point,
    cached: Option<&Arc<PlannedPath>>,
) -> Result<Arc<PlannedPath>, PlanError> {
    match (mode, cached) {
        (PlanMode::OneTime, Some(c)) => Ok(Arc::clone(c)),
        (PlanMode::OneTime, None) => Ok(Arc::new(planner.plan(start, dest)?)),
        (PlanMode::RealTime { period }, Some(c)) if !agent.t.is_multiple_of(u64::from(period.max(1))) => {
            Ok(Arc::clone(c))
        }
        (PlanMode::RealTime { .. }, _) => Ok(Arc::new(planner.plan(agent.position, dest)?)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub point: Point,
    /// Position along the source path, meters.
    pub arc_length: f64,
    pub collected: bool,
}

/// Regularly spaced waypoints along a path, ending at its destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointSet {
    pub spacing: f64,
    /// Polyline the arc lengths refer to.
    pub path: Vec<Point>,
    pub waypoints: Vec<Waypoint>,
}

impl WaypointSet {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn collected_count(&self) -> usize {
        self.waypoints.iter().filter(|w| w.collected).count()
    }

    pub fn uncollected(&self) -> impl Iterator<Item = &Waypoint> {
        self.waypoints.iter().filter(|w| !w.collected)
    }

    /// Builds a set from explicit targets joined by straight segments.
    pub fn from_targets(start: Point, targets: &[Point]) -> Self {
        let mut path = vec![start];
        path.extend_from_slice(targets);
        let mut walked = 0.0;
        let waypoints = targets
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                walked += path[i].distance(p);
                Waypoint {
                    point: p,
                    arc_length: walked,
                    collected: false,
                }
            })
            .collect();
        Self {
            spacing: f64::INFINITY,
            path,
            waypoints,
        }
    }
}

/// Waypoints at arc lengths `d_w, 2 d_w, ...` strictly before the end, plus
/// the destination itself.
pub fn extract_waypoints(path: &PlannedPath, spacing: f64) -> WaypointSet {
    assert!(spacing > 0.0, "waypoint spacing must be positive");
    let total = path.length;
    let mut waypoints = Vec::new();
    let mut k = 1u32;
    loop {
        let s = spacing * f64::from(k);
        if s >= total - 1e-9 {
            break;
        }
        waypoints.push(Waypoint {
            point: point_at(&path.points, s).expect("nonempty path"),
            arc_length: s,
            collected: false,
        });
        k += 1;
    }
    waypoints.push(Waypoint {
        point: path.end(),
        arc_length: total,
        collected: false,
    });
    WaypointSet {
        spacing,
        path: path.points.clone(),
        waypoints,
    }
}
