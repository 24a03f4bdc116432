//! Planar geometry shared by the simulator: points, angles and polylines.
//!
//! World coordinates are meters with +x east and +y north. Headings are in
//! degrees, 0° along +x and counter-clockwise positive.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Unit vector pointing along `heading_deg`.
    pub fn from_heading(heading_deg: f64) -> Point {
        let rad = heading_deg.to_radians();
        Point::new(rad.cos(), rad.sin())
    }

    /// Bearing of this vector in degrees, counter-clockwise from +x.
    pub fn bearing_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point {
    fn from(v: [f64; 2]) -> Self {
        Point::new(v[0], v[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Wraps an angle in degrees into `[-180, 180)`.
pub fn wrap_deg(angle: f64) -> f64 {
    let wrapped = (angle + 180.0).rem_euclid(360.0) - 180.0;
    // rem_euclid can round up to exactly 360 for tiny negative inputs.
    if wrapped >= 180.0 {
        wrapped - 360.0
    } else {
        wrapped
    }
}

/// Smallest absolute difference between two angles in degrees.
pub fn angle_diff_deg(a: f64, b: f64) -> f64 {
    wrap_deg(a - b).abs()
}

/// Closest point on a polyline to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    /// Arc length from the first vertex to `point`.
    pub arc_length: f64,
    /// Euclidean distance from the query to `point`.
    pub distance: f64,
    pub point: Point,
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

fn project_on_segment(a: Point, b: Point, p: Point) -> (f64, Point) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (0.0, a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (t, a.lerp(b, t))
}

/// Projects `p` onto the polyline. Ties resolve to the smallest arc length.
/// Returns `None` for an empty polyline.
pub fn project(points: &[Point], p: Point) -> Option<Projection> {
    let first = *points.first()?;
    let mut best = Projection {
        arc_length: 0.0,
        distance: first.distance(p),
        point: first,
    };
    let mut walked = 0.0;
    for w in points.windows(2) {
        let (t, q) = project_on_segment(w[0], w[1], p);
        let seg = w[0].distance(w[1]);
        let d = q.distance(p);
        if d < best.distance {
            best = Projection {
                arc_length: walked + t * seg,
                distance: d,
                point: q,
            };
        }
        walked += seg;
    }
    Some(best)
}

/// Distance from `p` to the polyline, `f64::INFINITY` when empty.
pub fn distance_to_polyline(points: &[Point], p: Point) -> f64 {
    project(points, p).map_or(f64::INFINITY, |pr| pr.distance)
}

/// Point at arc length `s`, clamped to the polyline ends.
pub fn point_at(points: &[Point], s: f64) -> Option<Point> {
    let first = *points.first()?;
    if s <= 0.0 {
        return Some(first);
    }
    let mut walked = 0.0;
    for w in points.windows(2) {
        let seg = w[0].distance(w[1]);
        if seg > 0.0 && walked + seg >= s {
            return Some(w[0].lerp(w[1], (s - walked) / seg));
        }
        walked += seg;
    }
    points.last().copied()
}

/// Sub-polyline covering arc lengths `[from, to]` (clamped).
pub fn slice(points: &[Point], from: f64, to: f64) -> Vec<Point> {
    if points.len() < 2 {
        return points.to_vec();
    }
    let total = polyline_length(points);
    let from = from.clamp(0.0, total);
    let to = to.clamp(from, total);
    let mut out = Vec::new();
    out.push(point_at(points, from).expect("nonempty"));
    let mut walked = 0.0;
    for w in points.windows(2) {
        walked += w[0].distance(w[1]);
        if walked > from && walked < to {
            out.push(w[1]);
        }
    }
    let end = point_at(points, to).expect("nonempty");
    if out.last() != Some(&end) || out.len() == 1 {
        out.push(end);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_covers_half_open_range() {
        assert_eq!(wrap_deg(180.0), -180.0);
        assert_eq!(wrap_deg(-180.0), -180.0);
        assert_eq!(wrap_deg(540.0), -180.0);
        assert_eq!(wrap_deg(-190.0), 170.0);
        assert!((-180.0..180.0).contains(&wrap_deg(-1e-18)));
        for i in -2000..2000 {
            let w = wrap_deg(i as f64 * 0.37);
            assert!((-180.0..180.0).contains(&w));
        }
    }

    #[test]
    fn projection_on_l_shape() {
        let line = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)];
        let pr = project(&line, Point::new(12.0, 5.0)).unwrap();
        assert_eq!(pr.arc_length, 15.0);
        assert_eq!(pr.distance, 2.0);
        assert_eq!(polyline_length(&line), 20.0);
        assert_eq!(point_at(&line, 12.0), Some(Point::new(10.0, 2.0)));
        assert_eq!(point_at(&line, 99.0), Some(Point::new(10.0, 10.0)));
    }

    #[test]
    fn slice_keeps_interior_vertices() {
        let line = [Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)];
        let s = slice(&line, 5.0, 15.0);
        assert_eq!(s, vec![Point::new(5.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 5.0)]);
        assert_eq!(polyline_length(&slice(&line, 3.0, 100.0)), 17.0);
        assert_eq!(slice(&line, 20.0, 20.0).len(), 2);
    }
}
