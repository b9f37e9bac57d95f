//! Planar geometry helpers shared by every stage.

use serde::{Deserialize, Serialize};

/// A point in a planar frame. Ground coordinates are meters (y north),
/// sheet coordinates are millimeters on paper (y down).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }
}

/// Axis-aligned rectangle, closed on all sides for intersection tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub const fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    /// Bounding box of a non-empty point set.
    pub fn bounding(points: impl IntoIterator<Item = Point>) -> Option<Rect> {
        let mut it = points.into_iter();
        let first = it.next()?;
        let mut r = Rect::new(first.x, first.y, first.x, first.y);
        for p in it {
            r.min_x = r.min_x.min(p.x);
            r.min_y = r.min_y.min(p.y);
            r.max_x = r.max_x.max(p.x);
            r.max_y = r.max_y.max(p.y);
        }
        Some(r)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(
            (self.min_x + self.max_x) / 2.0,
            (self.min_y + self.max_y) / 2.0,
        )
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.min_x >= self.min_x
            && other.max_x <= self.max_x
            && other.min_y >= self.min_y
            && other.max_y <= self.max_y
    }

    pub fn expand(&self, by: f64) -> Rect {
        Rect::new(
            self.min_x - by,
            self.min_y - by,
            self.max_x + by,
            self.max_y + by,
        )
    }

    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.min_x.min(other.min_x),
            self.min_y.min(other.min_y),
            self.max_x.max(other.max_x),
            self.max_y.max(other.max_y),
        )
    }
}

/// Distance from `p` to the closed segment `a`–`b`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Perpendicular distance from `p` to the infinite line through `a` and `b`.
pub fn point_line_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len = dx.hypot(dy);
    if len == 0.0 {
        return p.distance(a);
    }
    ((p.x - a.x) * dy - (p.y - a.y) * dx).abs() / len
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].distance(w[1])).sum()
}

/// Signed shoelace area; positive for counter-clockwise rings in a y-up frame.
/// Works for closed (first == last) and open rings alike.
pub fn ring_signed_area(ring: &[Point]) -> f64 {
    if ring.len() < 3 {
        return 0.0;
    }
    let n = ring.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    acc / 2.0
}

/// Area-weighted centroid of a ring. Falls back to the vertex mean for
/// degenerate rings.
pub fn ring_centroid(ring: &[Point]) -> Point {
    let n = ring.len();
    let area = ring_signed_area(ring);
    if n == 0 {
        return Point::default();
    }
    if area.abs() < 1e-12 {
        let sx: f64 = ring.iter().map(|p| p.x).sum();
        let sy: f64 = ring.iter().map(|p| p.y).sum();
        return Point::new(sx / n as f64, sy / n as f64);
    }
    // Shift to the first vertex to keep the products well conditioned.
    let o = ring[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let a = Point::new(ring[i].x - o.x, ring[i].y - o.y);
        let b = ring[(i + 1) % n];
        let b = Point::new(b.x - o.x, b.y - o.y);
        let cross = a.x * b.y - b.x * a.y;
        cx += (a.x + b.x) * cross;
        cy += (a.y + b.y) * cross;
    }
    Point::new(o.x + cx / (6.0 * area), o.y + cy / (6.0 * area))
}

/// Even-odd point-in-ring test. The ring may be open or closed.
pub fn point_in_ring(p: Point, ring: &[Point]) -> bool {
    let n = ring.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = ring[i];
        let b = ring[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Even-odd containment over a set of rings (exterior plus holes).
pub fn point_in_rings(p: Point, rings: &[Vec<Point>]) -> bool {
    rings.iter().filter(|r| point_in_ring(p, r)).count() % 2 == 1
}

/// Distance from `p` to the nearest ring edge.
pub fn distance_to_rings(p: Point, rings: &[Vec<Point>]) -> f64 {
    let mut best = f64::INFINITY;
    for ring in rings {
        let n = ring.len();
        for i in 0..n {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            best = best.min(point_segment_distance(p, a, b));
        }
    }
    best
}

/// Proper or touching intersection of two closed segments.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    fn orient(p: Point, q: Point, r: Point) -> f64 {
        (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    }
    fn on_segment(p: Point, q: Point, r: Point) -> bool {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    }
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Minimum distance between two segments.
pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Point at arc length `s` along a polyline (clamped to its ends).
pub fn point_at_length(points: &[Point], s: f64) -> Point {
    let mut acc = 0.0;
    for w in points.windows(2) {
        let len = w[0].distance(w[1]);
        if acc + len >= s && len > 0.0 {
            return w[0].lerp(w[1], (s - acc) / len);
        }
        acc += len;
    }
    points.last().copied().unwrap_or_default()
}

/// An oriented rectangle: center, half extents along its own axes, and the
/// unit vector of its first axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point,
    pub half_w: f64,
    pub half_h: f64,
    /// Unit vector of the width axis.
    pub axis: Point,
}

impl OrientedBox {
    pub fn corners(&self) -> [Point; 4] {
        let u = self.axis;
        let v = Point::new(-u.y, u.x);
        let c = self.center;
        let (w, h) = (self.half_w, self.half_h);
        [
            Point::new(c.x - u.x * w - v.x * h, c.y - u.y * w - v.y * h),
            Point::new(c.x + u.x * w - v.x * h, c.y + u.y * w - v.y * h),
            Point::new(c.x + u.x * w + v.x * h, c.y + u.y * w + v.y * h),
            Point::new(c.x - u.x * w + v.x * h, c.y - u.y * w + v.y * h),
        ]
    }

    pub fn inflate(&self, by: f64) -> OrientedBox {
        OrientedBox {
            half_w: self.half_w + by,
            half_h: self.half_h + by,
            ..*self
        }
    }

    pub fn bounds(&self) -> Rect {
        Rect::bounding(self.corners()).expect("four corners")
    }

    /// Local coordinates (along width axis, along height axis) of `p`.
    pub fn to_local(&self, p: Point) -> Point {
        let d = Point::new(p.x - self.center.x, p.y - self.center.y);
        let u = self.axis;
        Point::new(d.x * u.x + d.y * u.y, -d.x * u.y + d.y * u.x)
    }

    pub fn contains(&self, p: Point) -> bool {
        let l = self.to_local(p);
        l.x.abs() <= self.half_w && l.y.abs() <= self.half_h
    }

    /// Separating-axis overlap test. Boxes that only touch do not overlap.
    pub fn overlaps(&self, other: &OrientedBox) -> bool {
        let axes = [
            self.axis,
            Point::new(-self.axis.y, self.axis.x),
            other.axis,
            Point::new(-other.axis.y, other.axis.x),
        ];
        let ca = self.corners();
        let cb = other.corners();
        for ax in axes {
            let proj = |cs: &[Point; 4]| {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for c in cs {
                    let d = c.x * ax.x + c.y * ax.y;
                    lo = lo.min(d);
                    hi = hi.max(d);
                }
                (lo, hi)
            };
            let (alo, ahi) = proj(&ca);
            let (blo, bhi) = proj(&cb);
            if ahi <= blo + 1e-9 || bhi <= alo + 1e-9 {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ccw_square_has_positive_area() {
        let sq = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
            Point::new(0.0, 0.0),
        ];
        assert_eq!(ring_signed_area(&sq), 4.0);
        assert_eq!(ring_centroid(&sq), Point::new(1.0, 1.0));
        assert!(point_in_ring(Point::new(1.0, 1.0), &sq));
        assert!(!point_in_ring(Point::new(3.0, 1.0), &sq));
    }

    #[test]
    fn segment_distance_clamps_to_endpoints() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(10.0, 0.0);
        assert_eq!(point_segment_distance(Point::new(5.0, 3.0), a, b), 3.0);
        assert_eq!(point_segment_distance(Point::new(13.0, 4.0), a, b), 5.0);
        assert_eq!(point_line_distance(Point::new(13.0, 4.0), a, b), 4.0);
    }

    #[test]
    fn oriented_boxes() {
        let a = OrientedBox {
            center: Point::new(0.0, 0.0),
            half_w: 2.0,
            half_h: 1.0,
            axis: Point::new(1.0, 0.0),
        };
        let mut b = a;
        b.center = Point::new(3.9, 0.0);
        assert!(a.overlaps(&b));
        b.center = Point::new(4.0, 0.0);
        assert!(!a.overlaps(&b));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rotated = OrientedBox {
            center: Point::new(0.0, 2.3),
            half_w: 1.0,
            half_h: 1.0,
            axis: Point::new(s, s),
        };
        // Diamond reaches down to y = 2.3 - sqrt(2) < 1.
        assert!(a.overlaps(&rotated));
        // At 2.5 its lowest corner is 1.086, above the top edge y = 1.
        let lifted = OrientedBox {
            center: Point::new(0.0, 2.5),
            ..rotated
        };
        assert!(!a.overlaps(&lifted));
        assert!(rotated.contains(Point::new(0.0, 1.2)));
    }
}
