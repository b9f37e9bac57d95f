//! Source geodata: OSM XML ingestion into projected planar features.

mod osm;
mod projection;
mod store;
mod xml;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Point, Rect};

pub use osm::{parse_osm, ParseStats};
pub use projection::{project, unproject, LonLat, ProjectionConfig, EARTH_RADIUS_M};
pub use store::FeatureStore;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodataError {
    #[error("malformed XML at byte {position}: {message}")]
    MalformedXml { position: usize, message: String },
    #[error("way {way} references missing node {node}")]
    DanglingReference { way: i64, node: i64 },
    #[error("relation {relation}: ring does not close")]
    InvalidRing { relation: i64 },
    #[error("latitude {lat} outside [-85, 85]")]
    OutOfRange { lat: f64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

/// One key/value attribute of a source feature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTag {
    pub key: String,
    pub value: String,
}

/// Tag set with unique keys.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tags(BTreeMap<String, String>);

impl Tags {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a tag. Returns false (and keeps the existing value) when the
    /// key is empty or already present.
    pub fn insert(&mut self, tag: RawTag) -> bool {
        if tag.key.is_empty() || self.0.contains_key(&tag.key) {
            return false;
        }
        self.0.insert(tag.key, tag.value);
        true
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.0.contains_key(key)
    }

    pub fn is(&self, key: &str, value: &str) -> bool {
        self.get(key) == Some(value)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Tags {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut tags = Tags::new();
        for (k, v) in iter {
            tags.insert(RawTag {
                key: k.into(),
                value: v.into(),
            });
        }
        tags
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeometryKind {
    Point,
    Polyline,
    Polygon,
}

/// Planar geometry in meters. Polygon rings are closed; the first ring is
/// the counter-clockwise exterior, the rest are clockwise holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Geometry {
    Point(Point),
    Polyline(Vec<Point>),
    Polygon(Vec<Vec<Point>>),
}

impl Geometry {
    /// Builds a polyline, dropping consecutive duplicate vertices.
    pub fn polyline(points: Vec<Point>) -> Result<Geometry, GeodataError> {
        let points = dedup(points);
        if points.iter().any(|p| !p.is_finite()) {
            return Err(GeodataError::InvalidGeometry("non-finite coordinate".into()));
        }
        if points.len() < 2 {
            return Err(GeodataError::InvalidGeometry(
                "polyline needs at least 2 distinct points".into(),
            ));
        }
        Ok(Geometry::Polyline(points))
    }

    /// Builds a polygon from closed rings, normalizing orientation. The
    /// exterior must be simple.
    pub fn polygon(rings: Vec<Vec<Point>>) -> Result<Geometry, GeodataError> {
        let mut out = Vec::with_capacity(rings.len());
        for (i, ring) in rings.into_iter().enumerate() {
            let mut ring = dedup(ring);
            if ring.iter().any(|p| !p.is_finite()) {
                return Err(GeodataError::InvalidGeometry("non-finite coordinate".into()));
            }
            if ring.len() < 4 || ring.first() != ring.last() {
                return Err(GeodataError::InvalidGeometry(format!("ring {i} is not closed")));
            }
            let area = geom::ring_signed_area(&ring);
            if area == 0.0 {
                return Err(GeodataError::InvalidGeometry(format!("ring {i} has zero area")));
            }
            let want_ccw = i == 0;
            if (area > 0.0) != want_ccw {
                ring.reverse();
            }
            if i == 0 && ring_self_intersects(&ring) {
                return Err(GeodataError::InvalidGeometry(
                    "exterior ring self-intersects".into(),
                ));
            }
            out.push(ring);
        }
        if out.is_empty() {
            return Err(GeodataError::InvalidGeometry("polygon without rings".into()));
        }
        Ok(Geometry::Polygon(out))
    }

    pub fn kind(&self) -> GeometryKind {
        match self {
            Geometry::Point(_) => GeometryKind::Point,
            Geometry::Polyline(_) => GeometryKind::Polyline,
            Geometry::Polygon(_) => GeometryKind::Polygon,
        }
    }

    pub fn bbox(&self) -> Rect {
        match self {
            Geometry::Point(p) => Rect::new(p.x, p.y, p.x, p.y),
            Geometry::Polyline(pts) => Rect::bounding(pts.iter().copied()).expect("non-empty"),
            Geometry::Polygon(rings) => {
                Rect::bounding(rings[0].iter().copied()).expect("non-empty")
            }
        }
    }

    /// Vertices of every ring or the line, in order.
    pub fn vertex_count(&self) -> usize {
        match self {
            Geometry::Point(_) => 1,
            Geometry::Polyline(p) => p.len(),
            Geometry::Polygon(r) => r.iter().map(Vec::len).sum(),
        }
    }

    /// Ground area in m² (exterior minus holes); zero for non-polygons.
    pub fn area(&self) -> f64 {
        match self {
            Geometry::Polygon(rings) => rings.iter().map(|r| geom::ring_signed_area(r)).sum(),
            _ => 0.0,
        }
    }

    /// Ground length in m; zero for points, perimeter of the exterior for
    /// polygons.
    pub fn length(&self) -> f64 {
        match self {
            Geometry::Point(_) => 0.0,
            Geometry::Polyline(p) => geom::polyline_length(p),
            Geometry::Polygon(r) => geom::polyline_length(&r[0]),
        }
    }
}

fn dedup(mut points: Vec<Point>) -> Vec<Point> {
    points.dedup();
    points
}

fn ring_self_intersects(ring: &[Point]) -> bool {
    let n = ring.len() - 1;
    for i in 0..n {
        for j in i + 1..n {
            // Adjacent edges share a vertex; the first and last edge too.
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if geom::segments_intersect(ring[i], ring[i + 1], ring[j], ring[j + 1]) {
                return true;
            }
        }
    }
    false
}

/// Which OSM element a feature was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OsmRef {
    Node(i64),
    Way(i64),
    Relation(i64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceFeature {
    /// Unique within one ingestion; assigned in document order.
    pub id: i64,
    pub origin: OsmRef,
    pub geometry: Geometry,
    pub tags: Tags,
    pub name: Option<String>,
}

impl SourceFeature {
    pub fn new(id: i64, origin: OsmRef, geometry: Geometry, tags: Tags) -> Self {
        let name = tags.get("name").map(str::to_owned);
        Self {
            id,
            origin,
            geometry,
            tags,
            name,
        }
    }
}
