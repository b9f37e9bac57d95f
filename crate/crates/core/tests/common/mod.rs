//! Shared helpers for the integration tests: building OSM documents in
//! local meters and reading rendered sheets back.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::PathBuf;

use tactmap_core::geodata::unproject;
use tactmap_core::{parse_osm, FeatureStore, Point, ProjectionConfig, SheetId};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture_store() -> FeatureStore {
    let xml = std::fs::read(fixture_path("block.osm")).unwrap();
    parse_osm(&xml, &ProjectionConfig::default()).unwrap()
}

pub fn block_2x2() -> BTreeSet<SheetId> {
    [(0, 0), (1, 0), (0, 1), (1, 1)]
        .into_iter()
        .map(|(c, r)| SheetId::new(c, r))
        .collect()
}

/// OSM XML written from coordinates in meters around the default origin.
#[derive(Default)]
pub struct OsmBuilder {
    nodes: String,
    ways: String,
    next: i64,
}

impl OsmBuilder {
    pub fn new() -> Self {
        Self {
            next: 1,
            ..Self::default()
        }
    }

    fn node_id(&mut self, p: Point, tags: &[(&str, &str)]) -> i64 {
        let id = self.next;
        self.next += 1;
        let ll = unproject(p, &ProjectionConfig::default());
        write!(self.nodes, r#"<node id="{id}" lat="{:.9}" lon="{:.9}""#, ll.lat, ll.lon).unwrap();
        if tags.is_empty() {
            self.nodes.push_str("/>\n");
        } else {
            self.nodes.push_str(">\n");
            self.nodes.push_str(&tag_xml(tags));
            self.nodes.push_str("</node>\n");
        }
        id
    }

    pub fn node(&mut self, x: f64, y: f64, tags: &[(&str, &str)]) -> &mut Self {
        self.node_id(Point::new(x, y), tags);
        self
    }

    /// An open way; pass the first point again at the end to close it.
    pub fn way(&mut self, pts: &[(f64, f64)], tags: &[(&str, &str)]) -> &mut Self {
        let closed = pts.len() > 2 && pts.first() == pts.last();
        let n = if closed { pts.len() - 1 } else { pts.len() };
        let mut refs: Vec<i64> = pts[..n]
            .iter()
            .map(|&(x, y)| self.node_id(Point::new(x, y), &[]))
            .collect();
        if closed {
            refs.push(refs[0]);
        }
        let id = self.next;
        self.next += 1;
        writeln!(self.ways, r#"<way id="{id}">"#).unwrap();
        for r in refs {
            writeln!(self.ways, r#"<nd ref="{r}"/>"#).unwrap();
        }
        self.ways.push_str(&tag_xml(tags));
        self.ways.push_str("</way>\n");
        self
    }

    pub fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, tags: &[(&str, &str)]) -> &mut Self {
        self.way(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)], tags)
    }

    pub fn xml(&self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n{}{}</osm>\n",
            self.nodes, self.ways
        )
    }

    pub fn store(&self) -> FeatureStore {
        parse_osm(self.xml().as_bytes(), &ProjectionConfig::default()).unwrap()
    }
}

fn tag_xml(tags: &[(&str, &str)]) -> String {
    tags.iter()
        .map(|(k, v)| format!("<tag k=\"{}\" v=\"{}\"/>\n", escape(k), escape(v)))
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('"', "&quot;").replace('<', "&lt;")
}

/// A decoded sheet image reduced to a black mask.
pub struct Mask {
    pub width: usize,
    pub height: usize,
    black: Vec<bool>,
}

impl Mask {
    pub fn from_png(bytes: &[u8]) -> Self {
        let mut dec = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().unwrap();
        let mut buf = vec![0; dec.output_buffer_size().unwrap()];
        let info = dec.next_frame(&mut buf).unwrap();
        assert_eq!(info.color_type, png::ColorType::Rgb);
        let (width, height) = (info.width as usize, info.height as usize);
        let black = buf[..width * height * 3]
            .chunks_exact(3)
            .map(|p| p == [0, 0, 0])
            .collect();
        Self { width, height, black }
    }

    pub fn black(&self, x: usize, y: usize) -> bool {
        self.black[y * self.width + x]
    }

    pub fn count(&self) -> usize {
        self.black.iter().filter(|&&b| b).count()
    }
}
