//! Planar geometry shared by the scenario and channel modules.
//!
//! Angles follow the compass convention used throughout the crate: bearings
//! are measured clockwise from north (+y), in radians.

use std::f64::consts::TAU;

/// A point in the local planar frame, meters (x east, y north).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_signed(a: f64) -> f64 {
    let w = wrap_angle(a);
    if w > std::f64::consts::PI {
        w - TAU
    } else {
        w
    }
}

/// Shortest angular distance between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_signed(a - b).abs()
}

/// Clockwise-from-north bearing of `to` as seen from `from`.
///
/// Returns `None` when the two points coincide.
pub fn compass_bearing(from: Point, to: Point) -> Option<f64> {
    let d = to.sub(from);
    if d.x == 0.0 && d.y == 0.0 {
        return None;
    }
    Some(wrap_angle(d.x.atan2(d.y)))
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// A directed two-point segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub const fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    /// Reflects `p` across the infinite line through this segment.
    pub fn mirror(&self, p: Point) -> Point {
        let d = self.b.sub(self.a);
        let len2 = d.x * d.x + d.y * d.y;
        let t = ((p.x - self.a.x) * d.x + (p.y - self.a.y) * d.y) / len2;
        let foot = Point::new(self.a.x + t * d.x, self.a.y + t * d.y);
        Point::new(2.0 * foot.x - p.x, 2.0 * foot.y - p.y)
    }

    /// Signed side of `p` relative to the segment's supporting line.
    pub fn side(&self, p: Point) -> f64 {
        cross(self.a, self.b, p)
    }

    /// Proper crossing point of two segments, if their interiors cross at a
    /// single point. Collinear overlaps return `None`.
    pub fn crossing_point(&self, other: &Segment) -> Option<Point> {
        let r = self.b.sub(self.a);
        let s = other.b.sub(other.a);
        let denom = r.x * s.y - r.y * s.x;
        if denom.abs() < 1e-12 * (r.x.hypot(r.y) * s.x.hypot(s.y)).max(1e-300) {
            return None;
        }
        let qp = other.a.sub(self.a);
        let t = (qp.x * s.y - qp.y * s.x) / denom;
        let u = (qp.x * r.y - qp.y * r.x) / denom;
        if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
            Some(Point::new(self.a.x + t * r.x, self.a.y + t * r.y))
        } else {
            None
        }
    }

    /// True when the open segment `self` (endpoints excluded) shares at least
    /// one point with the closed segment `wall`.
    pub fn open_intersects(&self, wall: &Segment) -> bool {
        let scale = self.length().max(wall.length()).max(1.0);
        let eps = 1e-9 * scale * scale;
        let d1 = cross(wall.a, wall.b, self.a);
        let d2 = cross(wall.a, wall.b, self.b);
        let d3 = cross(self.a, self.b, wall.a);
        let d4 = cross(self.a, self.b, wall.b);

        if d1.abs() <= eps && d2.abs() <= eps {
            // collinear: overlap must cover an interior point of `self`
            let dir = self.b.sub(self.a);
            let len2 = dir.x * dir.x + dir.y * dir.y;
            let proj = |p: Point| ((p.x - self.a.x) * dir.x + (p.y - self.a.y) * dir.y) / len2;
            let (lo, hi) = {
                let (u, v) = (proj(wall.a), proj(wall.b));
                (u.min(v), u.max(v))
            };
            return hi > 1e-12 && lo < 1.0 - 1e-12;
        }

        // the open link meets the wall line only at an excluded endpoint
        if d1.abs() <= eps || d2.abs() <= eps {
            return false;
        }

        let straddle_link = (d1 > 0.0) != (d2 > 0.0);
        let straddle_wall = (d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps) || d3.abs() <= eps || d4.abs() <= eps;
        straddle_link && straddle_wall
    }
}

/// True when the polygon's boundary does not cross itself.
pub fn polygon_is_simple(vertices: &[Point]) -> bool {
    let n = vertices.len();
    if n < 3 {
        return false;
    }
    let edges: Vec<Segment> = (0..n)
        .map(|i| Segment::new(vertices[i], vertices[(i + 1) % n]))
        .collect();
    for i in 0..n {
        if edges[i].length() == 0.0 {
            return false;
        }
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_touch(&edges[i], &edges[j]) {
                return false;
            }
        }
    }
    true
}

fn segments_touch(p: &Segment, q: &Segment) -> bool {
    let d1 = cross(q.a, q.b, p.a);
    let d2 = cross(q.a, q.b, p.b);
    let d3 = cross(p.a, p.b, q.a);
    let d4 = cross(p.a, p.b, q.b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    let on = |a: Point, b: Point, p: Point, d: f64| {
        d == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
    };
    on(q.a, q.b, p.a, d1) || on(q.a, q.b, p.b, d2) || on(p.a, p.b, q.a, d3) || on(p.a, p.b, q.b, d4)
}
