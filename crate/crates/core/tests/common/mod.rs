//! Shared helpers for integration tests: random grid maps and a Dijkstra
//! reference planner written without reference to the A* code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use vg_core::geom::Point;
use vg_core::world::{Cell, CityMap, RoadGraph, SemanticClass};

/// `size` x `size` map of 1 m cells; each cell is a building with
/// probability `density`, road otherwise.
pub fn random_grid(seed: u64, size: usize, density: f64) -> CityMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = (0..size * size)
        .map(|_| {
            if rng.gen_bool(density) {
                SemanticClass::Building
            } else {
                SemanticClass::Road
            }
        })
        .collect();
    CityMap::new(
        format!("grid{seed}"),
        1.0,
        size,
        size,
        Point::new(0.0, 0.0),
        classes,
        RoadGraph::default(),
        BTreeMap::new(),
        Vec::new(),
    )
    .expect("random grid is valid")
}

pub fn road_cells(map: &CityMap) -> Vec<Cell> {
    (0..map.width() * map.height())
        .map(|i| map.cell_at_index(i))
        .filter(|&c| map.class_of_cell(c) == SemanticClass::Road)
        .collect()
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    col: usize,
    row: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost)
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest 8-connected route over road cells, diagonal steps allowed only
/// when both orthogonal neighbours are road. Returns
/// `(cardinal moves, diagonal moves)` of an optimal route.
pub fn dijkstra(map: &CityMap, start: Cell, goal: Cell) -> Option<(u32, u32)> {
    let (w, h) = (map.width(), map.height());
    let road = |c: usize, r: usize| map.class_of_cell(Cell { col: c, row: r }) == SemanticClass::Road;
    if !road(start.col, start.row) || !road(goal.col, goal.row) {
        return None;
    }
    let mut best = vec![vec![None::<(f64, u32, u32)>; w]; h];
    let mut done = vec![vec![false; w]; h];
    let mut heap = BinaryHeap::new();
    best[start.row][start.col] = Some((0.0, 0, 0));
    heap.push(Entry { cost: 0.0, col: start.col, row: start.row });
    while let Some(Entry { col, row, .. }) = heap.pop() {
        if done[row][col] {
            continue;
        }
        done[row][col] = true;
        let (_, a, b) = best[row][col].unwrap();
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                if dr == 0 && dc == 0 {
                    continue;
                }
                let (nc, nr) = (col as i64 + dc, row as i64 + dr);
                if nc < 0 || nr < 0 || nc >= w as i64 || nr >= h as i64 {
                    continue;
                }
                let (nc, nr) = (nc as usize, nr as usize);
                if !road(nc, nr) {
                    continue;
                }
                let diag = dr != 0 && dc != 0;
                if diag && !(road(nc, row) && road(col, nr)) {
                    continue;
                }
                let (na, nb) = if diag { (a, b + 1) } else { (a + 1, b) };
                let cost = na as f64 + nb as f64 * std::f64::consts::SQRT_2;
                if best[nr][nc].is_none_or(|(c, _, _)| cost < c) {
                    best[nr][nc] = Some((cost, na, nb));
                    heap.push(Entry { cost, col: nc, row: nr });
                }
            }
        }
    }
    best[goal.row][goal.col].map(|(_, a, b)| (a, b))
}
