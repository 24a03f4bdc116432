use crate::geom::{point_at, polyline_length, Point};
use serde::{Deserialize, Serialize};

/// A pedestrian walking along a fixed polyline at constant speed.
///
/// Closed polylines loop (the last vertex connects back to the first);
/// open ones ping-pong between their ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pedestrian {
    pub path: Vec<Point>,
    #[serde(default)]
    pub closed: bool,
    /// Meters per second.
    pub speed: f64,
    /// Collision radius in meters.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Arc-length offset at t = 0, meters.
    #[serde(default)]
    pub phase: f64,
}

fn default_radius() -> f64 {
    0.3
}

impl Pedestrian {
    pub fn validate(&self) -> Result<(), String> {
        if self.path.len() < 2 {
            return Err("path needs at least 2 points".into());
        }
        if self.path.iter().any(|p| !p.is_finite()) {
            return Err("path has non-finite coordinates".into());
        }
        if !(self.speed.is_finite() && self.speed >= 0.0) {
            return Err("speed must be >= 0".into());
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err("radius must be > 0".into());
        }
        if !self.phase.is_finite() {
            return Err("phase must be finite".into());
        }
        if self.loop_points().len() >= 2 && polyline_length(&self.loop_points()) == 0.0 {
            return Err("path has zero length".into());
        }
        Ok(())
    }

    fn loop_points(&self) -> Vec<Point> {
        let mut pts = self.path.clone();
        if self.closed {
            pts.push(self.path[0]);
        }
        pts
    }

    pub fn length(&self) -> f64 {
        polyline_length(&self.loop_points())
    }

    /// Position at `t` seconds after episode start.
    pub fn pose(&self, t: f64) -> Point {
        let pts = self.loop_points();
        let len = polyline_length(&pts);
        if len == 0.0 {
            return pts[0];
        }
        let s = self.phase + self.speed * t;
        let along = if self.closed {
            s.rem_euclid(len)
        } else {
            let m = s.rem_euclid(2.0 * len);
            if m > len {
                2.0 * len - m
            } else {
                m
            }
        };
        point_at(&pts, along).expect("nonempty path")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Pedestrian {
        Pedestrian {
            path: vec![
                Point::new(0.0, 0.0),
                Point::new(10.0, 0.0),
                Point::new(10.0, 10.0),
                Point::new(0.0, 10.0),
            ],
            closed: true,
            speed: 1.0,
            radius: 0.3,
            phase: 0.0,
        }
    }

    #[test]
    fn stationary_pedestrian_stays_at_phase() {
        let mut p = square();
        p.speed = 0.0;
        p.phase = 15.0;
        for t in [0.0, 3.0, 1e4] {
            assert_eq!(p.pose(t), Point::new(10.0, 5.0));
        }
    }

    #[test]
    fn closed_loop_wraps_after_perimeter() {
        let p = square();
        assert_eq!(p.length(), 40.0);
        assert_eq!(p.pose(40.0), Point::new(0.0, 0.0));
        assert_eq!(p.pose(35.0), Point::new(0.0, 5.0));
    }

    #[test]
    fn open_segment_ping_pongs() {
        let p = Pedestrian {
            path: vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0)],
            closed: false,
            speed: 1.0,
            radius: 0.3,
            phase: 0.0,
        };
        // 15 m walked: out 10, back 5 -> 5 m from the far end
        assert_eq!(p.pose(15.0), Point::new(5.0, 0.0));
        assert_eq!(p.pose(20.0), Point::new(0.0, 0.0));
        assert_eq!(p.pose(10.0), Point::new(10.0, 0.0));
    }

    #[test]
    fn validation_rejects_degenerate_paths() {
        let mut p = square();
        p.path.truncate(1);
        assert!(p.validate().is_err());
        let mut p = square();
        p.speed = -1.0;
        assert!(p.validate().is_err());
        let mut p = square();
        p.path = vec![Point::new(1.0, 1.0), Point::new(1.0, 1.0)];
        assert!(p.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn pose_stays_on_polyline(t in 0.0f64..1e4, phase in -50.0f64..50.0, closed: bool) {
            let mut p = square();
            p.closed = closed;
            p.phase = phase;
            p.speed = 1.3;
            let q = p.pose(t);
            let mut pts = p.path.clone();
            if closed { pts.push(pts[0]); }
            proptest::prop_assert!(crate::geom::distance_to_polyline(&pts, q) < 1e-9);
        }
    }
}
