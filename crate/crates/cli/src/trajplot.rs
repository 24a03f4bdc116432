//! Top-down SVG of a map with planned paths, waypoints and driven trajectories.

use crate::error::CliError;
use std::fmt::Write as _;
use vg_core::episode::EpisodeResult;
use vg_core::geom::Point;
use vg_core::world::{CityMap, SemanticClass};

pub const PLANNED_COLOR: &str = "#1e50ff";
pub const WAYPOINT_COLOR: &str = "#ffd400";
pub const TRAJECTORY_COLOR: &str = "#ff3fa4";

/// Pixels per meter.
const SCALE: f64 = 2.0;

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

struct Frame {
    min: Point,
    max_y: f64,
}

impl Frame {
    fn xy(&self, p: Point) -> (f64, f64) {
        ((p.x - self.min.x) * SCALE, (self.max_y - p.y) * SCALE)
    }

    fn points(&self, pts: &[Point]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.xy(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn render_svg(map: &CityMap, episodes: &[EpisodeResult]) -> Result<String, CliError> {
    let bounds = map.bounds();
    for (i, ep) in episodes.iter().enumerate() {
        if ep.map != map.name() {
            return Err(CliError::new(
                "MapMismatch",
                format!("episode {} was run on map {:?}, not {:?}", i + 1, ep.map, map.name()),
            ));
        }
        let inside = |p: &Point| {
            p.x >= bounds.min.x && p.x <= bounds.max.x && p.y >= bounds.min.y && p.y <= bounds.max.y
        };
        if !ep.trajectory.iter().chain(&ep.initial_plan.points).all(inside) {
            return Err(CliError::new(
                "MapMismatch",
                format!("episode {} leaves the bounds of map {:?}", i + 1, map.name()),
            ));
        }
    }

    let frame = Frame {
        min: bounds.min,
        max_y: bounds.max.y,
    };
    let (w, h) = (bounds.width() * SCALE, bounds.height() * SCALE);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );

    // Cells, merged into horizontal runs per row.
    let cs = map.cell_size() * SCALE;
    let _ = writeln!(s, r#"<g id="map" shape-rendering="crispEdges">"#);
    for row in 0..map.height() {
        let y = h - (row as f64 + 1.0) * cs;
        let classes = &map.classes()[row * map.width()..(row + 1) * map.width()];
        let mut col = 0;
        while col < classes.len() {
            let class = classes[col];
            let run = classes[col..].iter().take_while(|&&c| c == class).count();
            if class != SemanticClass::Void {
                let _ = writeln!(
                    s,
                    r#"<rect x="{:.2}" y="{y:.2}" width="{:.2}" height="{cs:.2}" fill="{}"/>"#,
                    col as f64 * cs,
                    run as f64 * cs,
                    hex(class.color()),
                );
            }
            col += run;
        }
    }
    let _ = writeln!(s, "</g>");

    for (i, ep) in episodes.iter().enumerate() {
        let _ = writeln!(s, r#"<g id="episode-{}" data-route="{}-{}" data-outcome="{}">"#, i + 1, ep.start, ep.dest, ep.outcome.name());
        let _ = writeln!(
            s,
            r#"<polyline class="planned" points="{}" fill="none" stroke="{PLANNED_COLOR}" stroke-width="2"/>"#,
            frame.points(&ep.initial_plan.points)
        );
        for &p in &ep.waypoints {
            let (x, y) = frame.xy(p);
            let _ = writeln!(s, r#"<circle class="waypoint" cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{WAYPOINT_COLOR}"/>"#);
        }
        let _ = writeln!(
            s,
            r#"<polyline class="trajectory" points="{}" fill="none" stroke="{TRAJECTORY_COLOR}" stroke-width="1.5"/>"#,
            frame.points(&ep.trajectory)
        );
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use vg_core::episode::{run_episode, EpisodeConfig};
    use vg_core::maps::build_city8;
    use vg_core::policies::PurePursuit;

    fn episode(map: &CityMap, from: &str, to: &str) -> EpisodeResult {
        let config = EpisodeConfig {
            pedestrians: false,
            record_steps: false,
            ..EpisodeConfig::for_route(from, to)
        };
        run_episode(&mut PurePursuit::default(), &config, map).unwrap()
    }

    #[test]
    fn empty_log_draws_only_the_map() {
        let map = build_city8();
        let svg = render_svg(&map, &[]).unwrap();
        assert!(svg.contains("<rect"));
        assert!(!svg.contains("polyline"));
    }

    #[test]
    fn one_group_per_episode_in_fixed_colors() {
        let map = build_city8();
        let eps = [episode(&map, "N1", "S1"), episode(&map, "W1", "M1"), episode(&map, "M4", "M3")];
        let svg = render_svg(&map, &eps).unwrap();
        assert_eq!(svg.matches(r#"class="trajectory""#).count(), 3);
        assert_eq!(svg.matches(&format!("stroke=\"{TRAJECTORY_COLOR}\"")).count(), 3);
        assert_eq!(svg.matches(&format!("stroke=\"{PLANNED_COLOR}\"")).count(), 3);
        let waypoints: usize = eps.iter().map(|e| e.waypoints.len()).sum();
        assert_eq!(svg.matches(r#"class="waypoint""#).count(), waypoints);
    }

    #[test]
    fn other_maps_are_rejected() {
        let map = build_city8();
        let mut ep = episode(&map, "N1", "S1");
        ep.map = "elsewhere".into();
        assert_eq!(render_svg(&map, &[ep]).unwrap_err().code, "MapMismatch");
    }
}
