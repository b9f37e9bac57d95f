//! Braille label placement on a sheet and label–label conflict resolution.
//!
//! All coordinates here are page millimeters with y pointing down. Label
//! angles use the usual counter-clockwise convention (y up), normalized
//! into (−π/2, π/2] so text never reads right to left.

mod polylabel;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::braille::{encode, AbbrevKind, Abbreviation, Alphabet, BrailleCell, BrailleMetrics};
use crate::geodata::Geometry;
use crate::geom::{self, OrientedBox, Point, Rect};
use crate::mapkey::{ClassifiedFeature, SymbolClass};
use crate::render::clip::{clip_polyline, clip_ring};
use crate::sheetgrid::{PageTransform, SheetId, SheetSpec};

pub use polylabel::pole_of_inaccessibility;

/// Paint and conflict priority, highest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum PriorityRank {
    Lettering = 1,
    PointSymbol = 2,
    StreetEdge = 3,
    TramRailStairs = 4,
    WallBrookCableway = 5,
    AreaFill = 6,
}

impl PriorityRank {
    pub fn of(class: SymbolClass) -> Option<PriorityRank> {
        use SymbolClass::*;
        Some(match class {
            AreaBuilding | AreaWater | AreaGreen | AreaIndustrial => PriorityRank::AreaFill,
            LineWall | LineBrook | LineCableway => PriorityRank::WallBrookCableway,
            LineTram | LineRail | LineStairs => PriorityRank::TramRailStairs,
            LineStreetWide | LineStreetNarrow => PriorityRank::StreetEdge,
            PointTramStop | PointCarPark | PointChurch => PriorityRank::PointSymbol,
            Omit => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LabelTarget {
    Street { id: i64, clipped_length_mm: f64 },
    Square { id: i64 },
    Designation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelPlacement {
    pub target: LabelTarget,
    pub letters: String,
    pub full_name: String,
    /// Label center in page millimeters.
    pub anchor: Point,
    pub angle: f64,
    pub cells: Vec<BrailleCell>,
    pub clearance: f64,
}

impl LabelPlacement {
    /// Reading direction in page coordinates (y down).
    pub fn direction(&self) -> Point {
        Point::new(self.angle.cos(), -self.angle.sin())
    }

    /// The cells' bounding box.
    pub fn label_box(&self, metrics: &BrailleMetrics) -> OrientedBox {
        OrientedBox {
            center: self.anchor,
            half_w: metrics.label_length(self.cells.len()) / 2.0,
            half_h: metrics.cell_height() / 2.0,
            axis: self.direction(),
        }
    }

    /// Label box grown by the clearance: the area kept free of drawing.
    pub fn inflated_box(&self, metrics: &BrailleMetrics) -> OrientedBox {
        self.label_box(metrics).inflate(self.clearance)
    }

    /// Centers of all raised dots in page millimeters.
    pub fn dot_centers(&self, metrics: &BrailleMetrics) -> Vec<Point> {
        let b = self.label_box(metrics);
        let u = b.axis;
        let v = Point::new(-u.y, u.x);
        let pad = (metrics.cell_pitch - metrics.cell_width()) / 2.0;
        let mut out = Vec::new();
        for (i, cell) in self.cells.iter().enumerate() {
            for dot in cell.dots() {
                let (dx, dy) = metrics.dot_offset(dot);
                let lx = -b.half_w + i as f64 * metrics.cell_pitch + pad + dx;
                let ly = -b.half_h + dy;
                out.push(Point::new(
                    b.center.x + u.x * lx + v.x * ly,
                    b.center.y + u.y * lx + v.y * ly,
                ));
            }
        }
        out
    }

    fn sort_key(&self) -> (u8, f64, i64, String) {
        match self.target {
            LabelTarget::Street {
                id,
                clipped_length_mm,
            } => (0, -clipped_length_mm, id, self.letters.clone()),
            LabelTarget::Square { id } => (1, 0.0, id, self.letters.clone()),
            LabelTarget::Designation => (2, 0.0, 0, self.letters.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutConfig {
    pub metrics: BrailleMetrics,
    /// Free space around map labels.
    pub clearance: f64,
    /// Extra chord length a street label needs beyond its cells.
    pub chord_margin: f64,
    /// Maximum deviation of the centerline from the label chord.
    pub straightness: f64,
    /// Labels stay this far inside the frame edge (keeps them off the
    /// frame border stroke).
    pub frame_inset: f64,
    /// Clearance of the margin designation.
    pub designation_clearance: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            metrics: BrailleMetrics::default(),
            clearance: 1.5,
            chord_margin: 4.0,
            straightness: 1.0,
            frame_inset: 0.5,
            designation_clearance: 0.5,
        }
    }
}

/// Normalizes an angle into (−π/2, π/2].
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    if a > FRAC_PI_2 {
        a -= PI;
    } else if a <= -FRAC_PI_2 {
        a += PI;
    }
    a
}

fn chord_angle(a: Point, b: Point) -> f64 {
    normalize_angle((-(b.y - a.y)).atan2(b.x - a.x))
}

fn inside_frame(b: &OrientedBox, frame: &Rect) -> bool {
    b.corners().iter().all(|c| frame.contains_point(*c))
}

/// Centerline pieces of a feature inside the sheet frame, in page mm.
fn page_parts(points: &[Point], t: &PageTransform) -> Vec<Vec<Point>> {
    clip_polyline(points, &t.bounds)
        .into_iter()
        .map(|l| l.points.into_iter().map(|p| t.to_page(p)).collect())
        .collect()
}

/// Places a street's abbreviation at the midpoint of the longest
/// near-straight run of its centerline on this sheet. `None` means the
/// street is only listed in the abbreviation file.
pub fn place_street_label(
    street: &ClassifiedFeature,
    abbr: &Abbreviation,
    transform: &PageTransform,
    alphabet: &Alphabet,
    cfg: &LayoutConfig,
) -> Option<LabelPlacement> {
    street_label_candidates(street, abbr, transform, alphabet, cfg)
        .into_iter()
        .next()
}

/// All acceptable street label positions, best first: chords longest
/// first, and on each chord the midpoint first, then positions slid by
/// whole cell pitches alternately forward and back.
pub fn street_label_candidates(
    street: &ClassifiedFeature,
    abbr: &Abbreviation,
    transform: &PageTransform,
    alphabet: &Alphabet,
    cfg: &LayoutConfig,
) -> Vec<LabelPlacement> {
    if street.class != SymbolClass::LineStreetWide || abbr.kind != AbbrevKind::Street {
        return Vec::new();
    }
    let Geometry::Polyline(points) = &street.geometry else {
        return Vec::new();
    };
    let Ok(cells) = encode(&abbr.letters, alphabet) else {
        return Vec::new();
    };
    let parts = page_parts(points, transform);
    let clipped_length_mm: f64 = parts.iter().map(|p| geom::polyline_length(p)).sum();
    let need = cfg.metrics.label_length(cells.len()) + cfg.chord_margin;

    // Longest straight-enough chord starting at each vertex; a chord ending
    // where the previous one ended is part of it and skipped.
    let mut chords: Vec<(f64, usize, usize, usize)> = Vec::new();
    for (pi, part) in parts.iter().enumerate() {
        let mut last_end = None;
        for i in 0..part.len() - 1 {
            let mut best = i + 1;
            for j in i + 2..part.len() {
                let straight = part[i + 1..j]
                    .iter()
                    .all(|p| geom::point_line_distance(*p, part[i], part[j]) <= cfg.straightness);
                if !straight {
                    break;
                }
                best = j;
            }
            if last_end == Some(best) {
                continue;
            }
            last_end = Some(best);
            let len = part[i].distance(part[best]);
            if len >= need {
                chords.push((len, pi, i, best));
            }
        }
    }
    chords.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));

    let frame = transform.spec.frame_mm().expand(-cfg.frame_inset);
    let step = cfg.metrics.cell_pitch;
    let mut out = Vec::new();
    for (len, pi, i, j) in chords {
        let (a, b) = (parts[pi][i], parts[pi][j]);
        let slack = (len - need) / 2.0;
        let mut offsets = vec![0.0];
        let mut k = 1.0;
        while k * step <= slack {
            offsets.push(k * step);
            offsets.push(-k * step);
            k += 1.0;
        }
        for d in offsets {
            let placement = LabelPlacement {
                target: LabelTarget::Street {
                    id: street.id(),
                    clipped_length_mm,
                },
                letters: abbr.letters.clone(),
                full_name: abbr.full_name.clone(),
                anchor: a.lerp(b, 0.5 + d / len),
                angle: chord_angle(a, b),
                cells: cells.clone(),
                clearance: cfg.clearance,
            };
            if inside_frame(&placement.inflated_box(&cfg.metrics), &frame) {
                out.push(placement);
            }
        }
    }
    out
}

fn box_inside_polygon(b: &OrientedBox, rings: &[Vec<Point>]) -> bool {
    let corners = b.corners();
    if !corners.iter().all(|c| geom::point_in_rings(*c, rings)) {
        return false;
    }
    for ring in rings {
        for e in ring.windows(2) {
            for k in 0..4 {
                if geom::segments_intersect(e[0], e[1], corners[k], corners[(k + 1) % 4]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Places a square's abbreviation horizontally at its centroid, or at the
/// pole of inaccessibility when the centroid falls outside. The inflated
/// label must fit inside the square.
pub fn place_square_label(
    id: i64,
    polygon: &Geometry,
    abbr: &Abbreviation,
    transform: &PageTransform,
    alphabet: &Alphabet,
    cfg: &LayoutConfig,
) -> Option<LabelPlacement> {
    if abbr.kind != AbbrevKind::Square {
        return None;
    }
    let Geometry::Polygon(rings) = polygon else {
        return None;
    };
    let cells = encode(&abbr.letters, alphabet).ok()?;
    let page_rings: Vec<Vec<Point>> = rings
        .iter()
        .map(|r| clip_ring(r, &transform.bounds))
        .filter(|r| !r.is_empty())
        .map(|r| r.into_iter().map(|p| transform.to_page(p)).collect())
        .collect();
    if page_rings.is_empty() || geom::ring_signed_area(&page_rings[0]) == 0.0 {
        return None;
    }
    let centroid = geom::ring_centroid(&page_rings[0]);
    let anchor = if geom::point_in_rings(centroid, &page_rings) {
        centroid
    } else {
        pole_of_inaccessibility(&page_rings, 0.1)
    };
    let placement = LabelPlacement {
        target: LabelTarget::Square { id },
        letters: abbr.letters.clone(),
        full_name: abbr.full_name.clone(),
        anchor,
        angle: 0.0,
        cells,
        clearance: cfg.clearance,
    };
    let b = placement.inflated_box(&cfg.metrics);
    let frame = transform.spec.frame_mm().expand(-cfg.frame_inset);
    (box_inside_polygon(&b, &page_rings) && inside_frame(&b, &frame)).then_some(placement)
}

/// The sheet designation in Braille, right-aligned in the top margin.
pub fn place_designation(
    id: SheetId,
    spec: &SheetSpec,
    alphabet: &Alphabet,
    cfg: &LayoutConfig,
) -> LabelPlacement {
    let text = id.designation();
    let cells = encode(&text, alphabet).expect("designations use letters, digits and '-'");
    let half_w = cfg.metrics.label_length(cells.len()) / 2.0;
    let half_h = cfg.metrics.cell_height() / 2.0;
    let right = spec.page_width_mm - spec.margin_right_mm;
    LabelPlacement {
        target: LabelTarget::Designation,
        letters: text.clone(),
        full_name: text,
        anchor: Point::new(
            right - half_w - cfg.designation_clearance,
            cfg.designation_clearance + half_h,
        ),
        angle: 0.0,
        cells,
        clearance: cfg.designation_clearance,
    }
}

/// Drops labels whose inflated boxes overlap an already kept one. Streets
/// go first (longest clipped centerline first), then squares, then the
/// designation; ties break on id. The result is in that order and does not
/// depend on input order.
pub fn resolve_conflicts(placements: Vec<LabelPlacement>, metrics: &BrailleMetrics) -> Vec<LabelPlacement> {
    resolve_with_alternatives(placements.into_iter().map(|p| vec![p]).collect(), metrics)
}

/// Like [`resolve_conflicts`] for targets with several candidate
/// positions: targets are taken in the same order (by their first
/// candidate) and each keeps its first candidate that fits.
pub fn resolve_with_alternatives(
    mut groups: Vec<Vec<LabelPlacement>>,
    metrics: &BrailleMetrics,
) -> Vec<LabelPlacement> {
    groups.retain(|g| !g.is_empty());
    groups.sort_by(|a, b| compare(&a[0], &b[0]));
    let mut kept: Vec<(LabelPlacement, OrientedBox)> = Vec::new();
    for group in groups {
        for p in group {
            let b = p.inflated_box(metrics);
            if kept.iter().all(|(_, k)| !k.overlaps(&b)) {
                kept.push((p, b));
                break;
            }
        }
    }
    kept.into_iter().map(|(p, _)| p).collect()
}

fn compare(a: &LabelPlacement, b: &LabelPlacement) -> std::cmp::Ordering {
    let (ka, kb) = (a.sort_key(), b.sort_key());
    ka.0.cmp(&kb.0)
        .then(ka.1.total_cmp(&kb.1))
        .then(ka.2.cmp(&kb.2))
        .then(ka.3.cmp(&kb.3))
        .then(a.anchor.x.total_cmp(&b.anchor.x))
        .then(a.anchor.y.total_cmp(&b.anchor.y))
}
