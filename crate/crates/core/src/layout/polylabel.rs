use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::{distance_to_rings, point_in_rings, ring_centroid, Point, Rect};

/// Signed distance to the boundary: positive inside.
fn signed_distance(p: Point, rings: &[Vec<Point>]) -> f64 {
    let d = distance_to_rings(p, rings);
    if point_in_rings(p, rings) {
        d
    } else {
        -d
    }
}

struct Cell {
    center: Point,
    half: f64,
    distance: f64,
    /// Upper bound of the distance anywhere inside the cell.
    potential: f64,
}

impl Cell {
    fn new(center: Point, half: f64, rings: &[Vec<Point>]) -> Self {
        let distance = signed_distance(center, rings);
        Self {
            center,
            half,
            distance,
            potential: distance + half * std::f64::consts::SQRT_2,
        }
    }
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.potential == other.potential
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.potential.total_cmp(&other.potential)
    }
}

/// Interior point farthest from the polygon boundary, to within
/// `precision`, found by quadtree branch and bound.
pub fn pole_of_inaccessibility(rings: &[Vec<Point>], precision: f64) -> Point {
    let Some(bb) = Rect::bounding(rings[0].iter().copied()) else {
        return Point::default();
    };
    let size = bb.width().min(bb.height());
    if size <= 0.0 {
        return Point::new(bb.min_x, bb.min_y);
    }
    let half = size / 2.0;
    let mut heap = BinaryHeap::new();
    let mut y = bb.min_y;
    while y < bb.max_y {
        let mut x = bb.min_x;
        while x < bb.max_x {
            heap.push(Cell::new(Point::new(x + half, y + half), half, rings));
            x += size;
        }
        y += size;
    }
    let mut best = Cell::new(ring_centroid(&rings[0]), 0.0, rings);
    let bbox_center = Cell::new(bb.center(), 0.0, rings);
    if bbox_center.distance > best.distance {
        best = bbox_center;
    }
    while let Some(cell) = heap.pop() {
        if cell.distance > best.distance {
            best = Cell::new(cell.center, 0.0, rings);
        }
        if cell.potential - best.distance <= precision {
            continue;
        }
        let h = cell.half / 2.0;
        for (dx, dy) in [(-h, -h), (h, -h), (-h, h), (h, h)] {
            heap.push(Cell::new(
                Point::new(cell.center.x + dx, cell.center.y + dy),
                h,
                rings,
            ));
        }
    }
    best.center
}
