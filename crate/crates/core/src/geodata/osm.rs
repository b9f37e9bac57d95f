use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::xml::{Event, Reader};
use super::{
    project, FeatureStore, GeodataError, Geometry, LonLat, OsmRef, ProjectionConfig, RawTag,
    SourceFeature, Tags,
};
use crate::geom::{self, Point};

/// Non-fatal observations collected while parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseStats {
    pub nodes: usize,
    pub ways: usize,
    pub relations: usize,
    /// Relations other than `type=multipolygon`.
    pub ignored_relations: usize,
    /// Multipolygons referencing ways absent from the file.
    pub incomplete_relations: usize,
    /// Ways or polygons that could not form valid geometry.
    pub invalid_geometries: usize,
    pub duplicate_tags: usize,
}

struct RawNode {
    id: i64,
    point: Point,
    tags: Tags,
}

struct RawWay {
    id: i64,
    refs: Vec<i64>,
    tags: Tags,
}

struct RawMember {
    kind: String,
    reference: i64,
    role: String,
}

struct RawRelation {
    id: i64,
    members: Vec<RawMember>,
    tags: Tags,
}

enum Current {
    None,
    Node(RawNode),
    Way(RawWay),
    Relation(RawRelation),
}

fn attr<'a>(attrs: &'a [(String, String)], key: &str) -> Option<&'a str> {
    attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

fn num_attr<T: std::str::FromStr>(
    attrs: &[(String, String)],
    key: &str,
    element: &str,
    position: usize,
) -> Result<T, GeodataError> {
    let raw = attr(attrs, key).ok_or_else(|| GeodataError::MalformedXml {
        position,
        message: format!("<{element}> without {key}"),
    })?;
    raw.trim().parse().map_err(|_| GeodataError::MalformedXml {
        position,
        message: format!("<{element}> has invalid {key}={raw:?}"),
    })
}

/// Whether a closed way describes an area rather than a ring-shaped line.
pub(crate) fn is_area(tags: &Tags) -> bool {
    if tags.is("area", "no") {
        return false;
    }
    tags.has("building")
        || tags.has("landuse")
        || tags.is("natural", "water")
        || tags.is("natural", "wood")
        || tags.has("leisure")
        || tags.is("waterway", "riverbank")
        || tags.is("area", "yes")
}

/// Parses OSM XML v0.6 into a feature store.
///
/// Tagged nodes become points, closed area ways polygons, other ways
/// polylines, and `type=multipolygon` relations polygons with holes (one
/// feature per outer ring). Feature ids are assigned in document order
/// starting at 1: nodes, then ways, then relations.
pub fn parse_osm(xml: &[u8], projection: &ProjectionConfig) -> Result<FeatureStore, GeodataError> {
    let mut reader = Reader::new(xml)?;
    let mut stats = ParseStats::default();
    let mut nodes: Vec<RawNode> = Vec::new();
    let mut ways: Vec<RawWay> = Vec::new();
    let mut relations: Vec<RawRelation> = Vec::new();
    let mut current = Current::None;
    let mut depth = 0usize;

    while let Some(event) = reader.next_event()? {
        match event {
            Event::Start {
                name,
                attrs,
                empty,
                position,
            } => {
                if !empty {
                    depth += 1;
                }
                let at_element_level = depth == 2 || (empty && depth == 1);
                match name.as_str() {
                    "node" if at_element_level => {
                        let id = num_attr(&attrs, "id", "node", position)?;
                        let lat: f64 = num_attr(&attrs, "lat", "node", position)?;
                        let lon: f64 = num_attr(&attrs, "lon", "node", position)?;
                        let point = project(LonLat::new(lon, lat), projection)?;
                        let node = RawNode {
                            id,
                            point,
                            tags: Tags::new(),
                        };
                        if empty {
                            nodes.push(node);
                        } else {
                            current = Current::Node(node);
                        }
                    }
                    "way" if at_element_level => {
                        let way = RawWay {
                            id: num_attr(&attrs, "id", "way", position)?,
                            refs: Vec::new(),
                            tags: Tags::new(),
                        };
                        if empty {
                            ways.push(way);
                        } else {
                            current = Current::Way(way);
                        }
                    }
                    "relation" if at_element_level => {
                        let rel = RawRelation {
                            id: num_attr(&attrs, "id", "relation", position)?,
                            members: Vec::new(),
                            tags: Tags::new(),
                        };
                        if empty {
                            relations.push(rel);
                        } else {
                            current = Current::Relation(rel);
                        }
                    }
                    "tag" => {
                        let key = attr(&attrs, "k").unwrap_or_default().to_owned();
                        let value = attr(&attrs, "v").unwrap_or_default().to_owned();
                        let tags = match &mut current {
                            Current::Node(n) => &mut n.tags,
                            Current::Way(w) => &mut w.tags,
                            Current::Relation(r) => &mut r.tags,
                            Current::None => continue,
                        };
                        if !tags.insert(RawTag { key, value }) {
                            stats.duplicate_tags += 1;
                        }
                    }
                    "nd" => {
                        if let Current::Way(w) = &mut current {
                            w.refs.push(num_attr(&attrs, "ref", "nd", position)?);
                        }
                    }
                    "member" => {
                        if let Current::Relation(r) = &mut current {
                            r.members.push(RawMember {
                                kind: attr(&attrs, "type").unwrap_or_default().to_owned(),
                                reference: num_attr(&attrs, "ref", "member", position)?,
                                role: attr(&attrs, "role").unwrap_or_default().to_owned(),
                            });
                        }
                    }
                    _ => {}
                }
            }
            Event::End { name } => {
                if depth == 2 {
                    match (name.as_str(), std::mem::replace(&mut current, Current::None)) {
                        ("node", Current::Node(n)) => nodes.push(n),
                        ("way", Current::Way(w)) => ways.push(w),
                        ("relation", Current::Relation(r)) => relations.push(r),
                        (_, other) => current = other,
                    }
                }
                depth = depth.saturating_sub(1);
            }
        }
    }

    stats.nodes = nodes.len();
    stats.ways = ways.len();
    stats.relations = relations.len();

    let node_pos: HashMap<i64, Point> = nodes.iter().map(|n| (n.id, n.point)).collect();
    let way_index: HashMap<i64, usize> = ways.iter().enumerate().map(|(i, w)| (w.id, i)).collect();

    let multipolygon_members: HashSet<i64> = relations
        .iter()
        .filter(|r| r.tags.is("type", "multipolygon"))
        .flat_map(|r| r.members.iter())
        .filter(|m| m.kind == "way")
        .map(|m| m.reference)
        .collect();

    let mut features = Vec::new();
    let mut next_id = 1i64;
    let mut push = |origin: OsmRef, geometry: Geometry, tags: Tags, features: &mut Vec<_>| {
        features.push(SourceFeature::new(next_id, origin, geometry, tags));
        next_id += 1;
    };

    for node in nodes.iter().filter(|n| !n.tags.is_empty()) {
        push(
            OsmRef::Node(node.id),
            Geometry::Point(node.point),
            node.tags.clone(),
            &mut features,
        );
    }

    let mut way_points: Vec<Vec<Point>> = Vec::with_capacity(ways.len());
    for way in &ways {
        let pts = way
            .refs
            .iter()
            .map(|r| {
                node_pos.get(r).copied().ok_or(GeodataError::DanglingReference {
                    way: way.id,
                    node: *r,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        way_points.push(pts);
    }

    for (way, pts) in ways.iter().zip(&way_points) {
        if way.tags.is_empty() && multipolygon_members.contains(&way.id) {
            continue;
        }
        let closed = way.refs.len() >= 4 && way.refs.first() == way.refs.last();
        let geometry = if closed && is_area(&way.tags) {
            Geometry::polygon(vec![pts.clone()])
        } else {
            Geometry::polyline(pts.clone())
        };
        match geometry {
            Ok(g) => push(OsmRef::Way(way.id), g, way.tags.clone(), &mut features),
            Err(_) => stats.invalid_geometries += 1,
        }
    }

    for rel in &relations {
        if !rel.tags.is("type", "multipolygon") {
            stats.ignored_relations += 1;
            continue;
        }
        let mut outers = Vec::new();
        let mut inners = Vec::new();
        let mut complete = true;
        for m in rel.members.iter().filter(|m| m.kind == "way") {
            let Some(&wi) = way_index.get(&m.reference) else {
                complete = false;
                break;
            };
            let pts = way_points[wi].clone();
            if m.role == "inner" {
                inners.push(pts);
            } else {
                outers.push(pts);
            }
        }
        if !complete {
            stats.incomplete_relations += 1;
            continue;
        }
        let outer_rings =
            assemble_rings(outers).ok_or(GeodataError::InvalidRing { relation: rel.id })?;
        let inner_rings =
            assemble_rings(inners).ok_or(GeodataError::InvalidRing { relation: rel.id })?;
        for outer in outer_rings {
            let mut rings = vec![outer.clone()];
            rings.extend(
                inner_rings
                    .iter()
                    .filter(|inner| geom::point_in_ring(inner[0], &outer))
                    .cloned(),
            );
            match Geometry::polygon(rings) {
                Ok(g) => push(OsmRef::Relation(rel.id), g, rel.tags.clone(), &mut features),
                Err(_) => stats.invalid_geometries += 1,
            }
        }
    }

    Ok(FeatureStore::with_stats(features, stats))
}

/// Joins way segments end to end into closed rings. Returns `None` when
/// some chain cannot be closed.
fn assemble_rings(mut parts: Vec<Vec<Point>>) -> Option<Vec<Vec<Point>>> {
    let mut rings = Vec::new();
    parts.retain(|p| !p.is_empty());
    while !parts.is_empty() {
        let mut ring = parts.remove(0);
        while ring.len() < 4 || ring.first() != ring.last() {
            let end = *ring.last()?;
            let pos = parts
                .iter()
                .position(|p| p.first() == Some(&end) || p.last() == Some(&end))?;
            let mut next = parts.remove(pos);
            if next.first() != Some(&end) {
                next.reverse();
            }
            ring.extend(next.into_iter().skip(1));
        }
        rings.push(ring);
    }
    Some(rings)
}
