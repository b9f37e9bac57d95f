//! Rectangle clipping. Intersection points take the rectangle's edge value
//! verbatim on the clipped axis, so pieces cut at a shared sheet edge have
//! bit-identical coordinates on both sheets.

use crate::geodata::Geometry;
use crate::geom::{Point, Rect};

/// A piece of a clipped polyline and the arc length along the original
/// line at which it starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ClippedLine {
    pub points: Vec<Point>,
    pub start_offset: f64,
}

/// Clips a polyline to a closed rectangle.
pub fn clip_polyline(points: &[Point], rect: &Rect) -> Vec<ClippedLine> {
    let mut out: Vec<ClippedLine> = Vec::new();
    let mut current: Option<ClippedLine> = None;
    let mut walked = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let seg_len = a.distance(b);
        match clip_segment(a, b, rect) {
            Some((t0, p0, _t1, p1)) => {
                let continues = t0 == 0.0
                    && current
                        .as_ref()
                        .is_some_and(|c| c.points.last() == Some(&p0));
                if !continues {
                    if let Some(done) = current.take() {
                        out.push(done);
                    }
                    current = Some(ClippedLine {
                        points: vec![p0],
                        start_offset: walked + t0 * seg_len,
                    });
                }
                let line = current.as_mut().expect("set above");
                if line.points.last() != Some(&p1) {
                    line.points.push(p1);
                }
            }
            None => {
                if let Some(done) = current.take() {
                    out.push(done);
                }
            }
        }
        walked += seg_len;
    }
    if let Some(done) = current.take() {
        out.push(done);
    }
    out.retain(|l| l.points.len() >= 2);
    out
}

/// Liang–Barsky. Returns the parameter range and snapped end points.
fn clip_segment(a: Point, b: Point, r: &Rect) -> Option<(f64, Point, f64, Point)> {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    // Which edge (if any) set each end: 0 = none, 1 = x edge, 2 = y edge.
    let mut e0 = (0u8, 0.0);
    let mut e1 = (0u8, 0.0);
    let checks = [
        (-dx, a.x - r.min_x, 1u8, r.min_x),
        (dx, r.max_x - a.x, 1u8, r.max_x),
        (-dy, a.y - r.min_y, 2u8, r.min_y),
        (dy, r.max_y - a.y, 2u8, r.max_y),
    ];
    for (p, q, axis, edge) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
            continue;
        }
        let t = q / p;
        if p < 0.0 {
            if t > t1 {
                return None;
            }
            if t > t0 {
                t0 = t;
                e0 = (axis, edge);
            }
        } else {
            if t < t0 {
                return None;
            }
            if t < t1 {
                t1 = t;
                e1 = (axis, edge);
            }
        }
    }
    let snap = |t: f64, e: (u8, f64), end: Point| -> Point {
        if t == 0.0 && e.0 == 0 {
            return a;
        }
        if t == 1.0 && e.0 == 0 {
            return end;
        }
        let mut p = a.lerp(b, t);
        match e.0 {
            1 => {
                p.x = e.1;
                p.y = p.y.clamp(r.min_y, r.max_y);
            }
            2 => {
                p.y = e.1;
                p.x = p.x.clamp(r.min_x, r.max_x);
            }
            _ => {}
        }
        p
    };
    let p0 = snap(t0, e0, a);
    let p1 = snap(t1, e1, b);
    Some((t0, p0, t1, p1))
}

/// Sutherland–Hodgman against the four rectangle edges. The result is
/// closed (first == last) or empty.
pub fn clip_ring(ring: &[Point], rect: &Rect) -> Vec<Point> {
    let mut pts: Vec<Point> = ring.to_vec();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    type Inside = fn(Point, &Rect) -> bool;
    type Cut = fn(Point, Point, &Rect) -> Point;
    let edges: [(Inside, Cut); 4] = [
        (|p, r| p.x >= r.min_x, |a, b, r| cut_x(a, b, r.min_x)),
        (|p, r| p.x <= r.max_x, |a, b, r| cut_x(a, b, r.max_x)),
        (|p, r| p.y >= r.min_y, |a, b, r| cut_y(a, b, r.min_y)),
        (|p, r| p.y <= r.max_y, |a, b, r| cut_y(a, b, r.max_y)),
    ];
    for (inside, cut) in edges {
        if pts.is_empty() {
            break;
        }
        let input = std::mem::take(&mut pts);
        let n = input.len();
        for i in 0..n {
            let cur = input[i];
            let prev = input[(i + n - 1) % n];
            match (inside(prev, rect), inside(cur, rect)) {
                (true, true) => pts.push(cur),
                (true, false) => pts.push(cut(prev, cur, rect)),
                (false, true) => {
                    pts.push(cut(prev, cur, rect));
                    pts.push(cur);
                }
                (false, false) => {}
            }
        }
    }
    pts.dedup();
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    if pts.len() < 3 {
        return Vec::new();
    }
    pts.push(pts[0]);
    pts
}

fn cut_x(a: Point, b: Point, x: f64) -> Point {
    let t = (x - a.x) / (b.x - a.x);
    Point::new(x, a.y + t * (b.y - a.y))
}

fn cut_y(a: Point, b: Point, y: f64) -> Point {
    let t = (y - a.y) / (b.y - a.y);
    Point::new(a.x + t * (b.x - a.x), y)
}

/// Clips a geometry to `rect` grown by `overlap` on every side. Points
/// outside vanish, polylines may split into several parts, polygons keep
/// their surviving rings.
pub fn clip(geometry: &Geometry, rect: &Rect, overlap: f64) -> Vec<Geometry> {
    let r = rect.expand(overlap.max(0.0));
    match geometry {
        Geometry::Point(p) => {
            if r.contains_point(*p) {
                vec![Geometry::Point(*p)]
            } else {
                Vec::new()
            }
        }
        Geometry::Polyline(pts) => clip_polyline(pts, &r)
            .into_iter()
            .map(|l| Geometry::Polyline(l.points))
            .collect(),
        Geometry::Polygon(rings) => {
            let bb = geometry.bbox();
            if r.contains_rect(&bb) {
                return vec![geometry.clone()];
            }
            if !r.intersects(&bb) {
                return Vec::new();
            }
            let exterior = clip_ring(&rings[0], &r);
            if exterior.is_empty() {
                return Vec::new();
            }
            let mut out = vec![exterior];
            out.extend(
                rings[1..]
                    .iter()
                    .map(|h| clip_ring(h, &r))
                    .filter(|h| !h.is_empty()),
            );
            vec![Geometry::Polygon(out)]
        }
    }
}
