use std::cmp::Reverse;

use serde::{Deserialize, Serialize};

use super::{classify, road_rank, simplify, ClassificationRules, ClassifiedFeature, SymbolClass};
use crate::geodata::{Geometry, SourceFeature};
use crate::geom::{self, Point, Rect};
use crate::render::clip::clip_polyline;
use crate::sheetgrid::SheetSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizeConfig {
    pub simplify_tolerance_m: f64,
    pub min_area_mm2: f64,
    pub min_length_mm: f64,
    /// Twin bridge decks closer than this are merged.
    pub bridge_distance_m: f64,
    /// A place of worship this close to another building counts as part of
    /// a block.
    pub church_touch_m: f64,
    /// Paper width of a wide street corridor, for the density rule.
    pub wide_corridor_mm: f64,
    pub density_threshold: f64,
}

impl Default for GeneralizeConfig {
    fn default() -> Self {
        Self {
            simplify_tolerance_m: super::DEFAULT_TOLERANCE_M,
            min_area_mm2: 16.0,
            min_length_mm: 4.0,
            bridge_distance_m: 10.0,
            church_touch_m: 0.5,
            wide_corridor_mm: 13.0,
            density_threshold: super::DEFAULT_DENSITY_THRESHOLD,
        }
    }
}

/// Classification, bridge merging, church reduction, simplification and
/// small-feature suppression. Omitted features are dropped. Street
/// demotion is per sheet and not part of this pass.
pub fn generalize<'a>(
    features: impl IntoIterator<Item = &'a SourceFeature>,
    rules: &ClassificationRules,
    cfg: &GeneralizeConfig,
    spec: &SheetSpec,
) -> Vec<ClassifiedFeature> {
    let classified: Vec<ClassifiedFeature> = features
        .into_iter()
        .filter_map(|f| {
            let class = classify(f, rules);
            (class != SymbolClass::Omit).then(|| ClassifiedFeature {
                source: f.clone(),
                class,
                geometry: f.geometry.clone(),
            })
        })
        .collect();
    let merged = merge_bridge_twins(classified, cfg.bridge_distance_m);
    let reduced = reduce_block_churches(merged, cfg.church_touch_m);
    let simplified = reduced
        .into_iter()
        .filter_map(|mut f| {
            f.geometry = simplify(&f.geometry, cfg.simplify_tolerance_m).ok()?;
            Some(f)
        })
        .collect();
    suppress_small(simplified, cfg.min_area_mm2, cfg.min_length_mm, spec)
}

/// Drops areas smaller than `min_area_mm2` and lines shorter than
/// `min_length_mm` on paper. Points always survive.
pub fn suppress_small(
    features: Vec<ClassifiedFeature>,
    min_area_mm2: f64,
    min_length_mm: f64,
    spec: &SheetSpec,
) -> Vec<ClassifiedFeature> {
    let k = spec.ground_m_per_mm();
    features
        .into_iter()
        .filter(|f| match &f.geometry {
            Geometry::Point(_) => true,
            Geometry::Polyline(_) => {
                let mm = f.geometry.length() / k;
                mm > 0.0 && mm >= min_length_mm
            }
            Geometry::Polygon(_) => f.geometry.area() / (k * k) >= min_area_mm2,
        })
        .collect()
}

/// Wide-street corridor area inside `sheet`, in m²: clipped centerline
/// length times the corridor's ground width.
pub fn corridor_area(
    features: &[ClassifiedFeature],
    sheet: &Rect,
    corridor_width_m: f64,
) -> f64 {
    features
        .iter()
        .filter(|f| f.class == SymbolClass::LineStreetWide)
        .map(|f| clipped_length(f, sheet) * corridor_width_m)
        .sum()
}

fn clipped_length(f: &ClassifiedFeature, sheet: &Rect) -> f64 {
    match &f.geometry {
        Geometry::Polyline(pts) => clip_polyline(pts, sheet)
            .iter()
            .map(|l| geom::polyline_length(&l.points))
            .sum(),
        _ => 0.0,
    }
}

/// Reclassifies wide streets as narrow, least important first (road rank,
/// then id), until the wide corridor area is at most `threshold` of the
/// sheet. A threshold of 1 or more disables demotion.
pub fn demote_dense_streets(
    mut features: Vec<ClassifiedFeature>,
    sheet: &Rect,
    threshold: f64,
    corridor_width_m: f64,
) -> Vec<ClassifiedFeature> {
    if threshold >= 1.0 {
        return features;
    }
    let limit = threshold * sheet.area();
    let mut total = corridor_area(&features, sheet, corridor_width_m);
    if total <= limit {
        return features;
    }
    let mut order: Vec<(u8, i64, usize, f64)> = features
        .iter()
        .enumerate()
        .filter(|(_, f)| f.class == SymbolClass::LineStreetWide)
        .map(|(i, f)| {
            (
                road_rank(&f.source.tags),
                f.id(),
                i,
                clipped_length(f, sheet) * corridor_width_m,
            )
        })
        .filter(|o| o.3 > 0.0)
        .collect();
    order.sort_by_key(|&(rank, id, _, _)| (rank, id));
    for (_, _, i, area) in order {
        if total <= limit {
            break;
        }
        features[i].class = SymbolClass::LineStreetNarrow;
        total -= area;
    }
    features
}

/// Vertex-and-sample Hausdorff distance between two polylines.
fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    fn one_way(a: &[Point], b: &[Point]) -> f64 {
        let len = geom::polyline_length(a);
        let steps = (len / 1.0).ceil().clamp(1.0, 2000.0) as usize;
        (0..=steps)
            .map(|i| geom::point_at_length(a, len * i as f64 / steps as f64))
            .chain(a.iter().copied())
            .map(|p| {
                b.windows(2)
                    .map(|s| geom::point_segment_distance(p, s[0], s[1]))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }
    one_way(a, b).max(one_way(b, a))
}

fn averaged_centerline(lines: &[&[Point]]) -> Vec<Point> {
    let reference = lines[0];
    let (r0, r1) = (reference[0], *reference.last().expect("non-empty"));
    let oriented: Vec<Vec<Point>> = lines
        .iter()
        .map(|l| {
            let mut l = l.to_vec();
            let (a, b) = (l[0], *l.last().expect("non-empty"));
            if a.distance(r0) + b.distance(r1) > a.distance(r1) + b.distance(r0) {
                l.reverse();
            }
            l
        })
        .collect();
    let n = oriented
        .iter()
        .map(|l| (geom::polyline_length(l) / 2.0).ceil() as usize + 1)
        .chain(oriented.iter().map(Vec::len))
        .max()
        .unwrap_or(2)
        .clamp(2, 1000);
    let lens: Vec<f64> = oriented.iter().map(|l| geom::polyline_length(l)).collect();
    let mut out: Vec<Point> = (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            let (mut sx, mut sy) = (0.0, 0.0);
            for (l, len) in oriented.iter().zip(&lens) {
                let p = geom::point_at_length(l, t * len);
                sx += p.x;
                sy += p.y;
            }
            let k = oriented.len() as f64;
            Point::new(sx / k, sy / k)
        })
        .collect();
    out.dedup();
    out
}

/// Replaces groups of parallel bridge decks (`bridge=yes`, same name,
/// within `max_distance` of each other) by one averaged centerline that
/// takes the class and tags of the highest-ranked member and the smallest
/// member id.
pub fn merge_bridge_twins(
    features: Vec<ClassifiedFeature>,
    max_distance: f64,
) -> Vec<ClassifiedFeature> {
    let candidates: Vec<usize> = features
        .iter()
        .enumerate()
        .filter(|(_, f)| {
            f.class.is_street()
                && f.source.tags.is("bridge", "yes")
                && matches!(f.geometry, Geometry::Polyline(_))
        })
        .map(|(i, _)| i)
        .collect();
    if candidates.len() < 2 {
        return features;
    }
    // Union-find over candidate indices.
    let mut parent: Vec<usize> = (0..candidates.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let line = |i: usize| -> &[Point] {
        match &features[candidates[i]].geometry {
            Geometry::Polyline(p) => p,
            _ => unreachable!("filtered to polylines"),
        }
    };
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            let (fi, fj) = (&features[candidates[i]], &features[candidates[j]]);
            if fi.source.name != fj.source.name {
                continue;
            }
            let (bi, bj) = (fi.geometry.bbox(), fj.geometry.bbox());
            if !bi.expand(max_distance).intersects(&bj) {
                continue;
            }
            if hausdorff(line(i), line(j)) <= max_distance {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..candidates.len() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    let mut drop = vec![false; features.len()];
    let mut merged = Vec::new();
    for members in groups.values().filter(|m| m.len() > 1) {
        let lines: Vec<&[Point]> = members.iter().map(|&m| line(m)).collect();
        let centerline = averaged_centerline(&lines);
        let best = members
            .iter()
            .map(|&m| &features[candidates[m]])
            .max_by_key(|f| {
                (
                    f.class == SymbolClass::LineStreetWide,
                    road_rank(&f.source.tags),
                    Reverse(f.id()),
                )
            })
            .expect("non-empty group");
        let min_id = members
            .iter()
            .map(|&m| features[candidates[m]].id())
            .min()
            .expect("non-empty group");
        let geometry = Geometry::Polyline(centerline);
        let mut source = best.source.clone();
        source.id = min_id;
        source.geometry = geometry.clone();
        merged.push(ClassifiedFeature {
            source,
            class: best.class,
            geometry,
        });
        for &m in members {
            drop[candidates[m]] = true;
        }
    }
    let mut out: Vec<ClassifiedFeature> = features
        .into_iter()
        .zip(drop)
        .filter_map(|(f, d)| (!d).then_some(f))
        .chain(merged)
        .collect();
    out.sort_by_key(|f| f.id());
    out
}

fn rings_within(a: &[Vec<Point>], b: &[Vec<Point>], d: f64) -> bool {
    let (ea, eb) = (&a[0], &b[0]);
    if geom::point_in_ring(ea[0], eb) || geom::point_in_ring(eb[0], ea) {
        return true;
    }
    for sa in ea.windows(2) {
        for sb in eb.windows(2) {
            if geom::segment_segment_distance(sa[0], sa[1], sb[0], sb[1]) <= d {
                return true;
            }
        }
    }
    false
}

/// Places of worship drawn as buildings that touch another building are
/// reduced to a church point at their footprint centroid; freestanding
/// ones keep their ground plan.
pub fn reduce_block_churches(
    mut features: Vec<ClassifiedFeature>,
    touch_distance: f64,
) -> Vec<ClassifiedFeature> {
    let buildings: Vec<(usize, Rect)> = features
        .iter()
        .enumerate()
        .filter(|(_, f)| f.class == SymbolClass::AreaBuilding)
        .map(|(i, f)| (i, f.geometry.bbox()))
        .collect();
    let mut to_reduce = Vec::new();
    for &(i, bb) in &buildings {
        let f = &features[i];
        if !f.source.tags.is("amenity", "place_of_worship") {
            continue;
        }
        let Geometry::Polygon(rings) = &f.geometry else {
            continue;
        };
        let in_block = buildings.iter().any(|&(j, other_bb)| {
            if j == i || !bb.expand(touch_distance).intersects(&other_bb) {
                return false;
            }
            let Geometry::Polygon(other) = &features[j].geometry else {
                return false;
            };
            rings_within(rings, other, touch_distance)
        });
        if in_block {
            to_reduce.push((i, geom::ring_centroid(&rings[0])));
        }
    }
    for (i, c) in to_reduce {
        features[i].class = SymbolClass::PointChurch;
        features[i].geometry = Geometry::Point(c);
    }
    features
}
