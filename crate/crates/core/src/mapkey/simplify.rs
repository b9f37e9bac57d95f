use thiserror::Error;

use crate::geodata::Geometry;
use crate::geom::{point_segment_distance, Point};

/// 0.25 mm on paper at 1:1500.
pub const DEFAULT_TOLERANCE_M: f64 = 0.375;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum SimplifyError {
    #[error("polygon collapsed below 4 ring points")]
    DegenerateResult,
}

/// Douglas–Peucker with a ground tolerance. Retained vertices are never
/// moved; a vertex is dropped only when it lies strictly closer than
/// `tolerance` to the simplified line, so a zero tolerance keeps all.
/// Polygon holes that collapse are dropped; a collapsed exterior is an
/// error.
pub fn simplify(geometry: &Geometry, tolerance: f64) -> Result<Geometry, SimplifyError> {
    let tolerance = tolerance.max(0.0);
    match geometry {
        Geometry::Point(p) => Ok(Geometry::Point(*p)),
        Geometry::Polyline(pts) => Ok(Geometry::Polyline(simplify_open(pts, tolerance))),
        Geometry::Polygon(rings) => {
            let mut out = Vec::with_capacity(rings.len());
            for (i, ring) in rings.iter().enumerate() {
                match simplify_ring(ring, tolerance) {
                    Some(r) => out.push(r),
                    None if i == 0 => return Err(SimplifyError::DegenerateResult),
                    None => {}
                }
            }
            Ok(Geometry::Polygon(out))
        }
    }
}

fn simplify_open(pts: &[Point], tolerance: f64) -> Vec<Point> {
    if pts.len() <= 2 {
        return pts.to_vec();
    }
    let keep = mark(pts, tolerance);
    pts.iter()
        .zip(keep)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect()
}

/// Keep-flags for `pts` with both ends fixed.
fn mark(pts: &[Point], tolerance: f64) -> Vec<bool> {
    let n = pts.len();
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((a, b)) = stack.pop() {
        if b <= a + 1 {
            continue;
        }
        let mut far = a;
        let mut far_d = -1.0;
        for (i, p) in pts.iter().enumerate().take(b).skip(a + 1) {
            let d = point_segment_distance(*p, pts[a], pts[b]);
            if d > far_d {
                far_d = d;
                far = i;
            }
        }
        if far_d >= tolerance {
            keep[far] = true;
            stack.push((a, far));
            stack.push((far, b));
        }
    }
    keep
}

/// Closed ring: split at the vertex farthest from the start so both halves
/// have distinct anchors.
fn simplify_ring(ring: &[Point], tolerance: f64) -> Option<Vec<Point>> {
    let n = ring.len();
    if n < 4 {
        return None;
    }
    let start = ring[0];
    let split = (1..n - 1)
        .max_by(|&i, &j| {
            start
                .distance(ring[i])
                .total_cmp(&start.distance(ring[j]))
                .then(j.cmp(&i))
        })
        .expect("ring has interior vertices");
    let first = mark(&ring[..=split], tolerance);
    let second = mark(&ring[split..], tolerance);
    let mut out: Vec<Point> = ring[..=split]
        .iter()
        .zip(&first)
        .filter_map(|(p, k)| k.then_some(*p))
        .collect();
    out.extend(
        ring[split..]
            .iter()
            .zip(&second)
            .skip(1)
            .filter_map(|(p, k)| k.then_some(*p)),
    );
    (out.len() >= 4).then_some(out)
}
