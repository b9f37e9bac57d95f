//! Synthetic input for the benchmarks: a street grid with named streets,
//! building blocks, a park and a tram line, written as OSM XML.

use std::fmt::Write as _;

use tactmap_core::geodata::unproject;
use tactmap_core::{Point, ProjectionConfig};

const ONSETS: &[&str] = &[
    "b", "č", "d", "h", "k", "l", "m", "n", "p", "r", "ř", "s", "š", "t", "v", "z", "ž", "j",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "á"];
const CODAS: &[&str] = &["lov", "rn", "st", "dk", "šk", "ch", "mn", "tr", "zk", "nd", "ps", "rk", "vn", "lš", "bř", "žd", "ct", "př"];

/// A `blocks`×`blocks` grid of 100 m street blocks starting at the origin.
pub fn synthetic_city(blocks: usize) -> String {
    let cfg = ProjectionConfig::default();
    let mut nodes = String::new();
    let mut ways = String::new();
    let mut next = 1i64;
    let mut node = |out: &mut String, x: f64, y: f64| {
        let ll = unproject(Point::new(x, y), &cfg);
        writeln!(out, r#"<node id="{next}" lat="{:.9}" lon="{:.9}"/>"#, ll.lat, ll.lon).unwrap();
        next += 1;
        next - 1
    };
    let mut way_id = 1_000_000i64;
    let mut way = |out: &mut String, refs: &[i64], tags: &[(&str, &str)]| {
        writeln!(out, r#"<way id="{way_id}">"#).unwrap();
        for r in refs {
            writeln!(out, r#"<nd ref="{r}"/>"#).unwrap();
        }
        for (k, v) in tags {
            writeln!(out, r#"<tag k="{k}" v="{v}"/>"#).unwrap();
        }
        out.push_str("</way>\n");
        way_id += 1;
    };

    let span = blocks as f64 * 100.0;
    for i in 0..=blocks {
        let t = i as f64 * 100.0;
        let name = street_name(i);
        let class = if i % 3 == 0 { "secondary" } else { "residential" };
        let a = node(&mut nodes, 0.0, t);
        let b = node(&mut nodes, span, t);
        way(&mut ways, &[a, b], &[("highway", class), ("name", &format!("{name} horní"))]);
        let a = node(&mut nodes, t, 0.0);
        let b = node(&mut nodes, t, span);
        way(&mut ways, &[a, b], &[("highway", class), ("name", &format!("{name} dolní"))]);
    }
    for bx in 0..blocks {
        for by in 0..blocks {
            let (x0, y0) = (bx as f64 * 100.0 + 15.0, by as f64 * 100.0 + 15.0);
            let tag = match (bx + by) % 7 {
                0 => ("leisure", "park"),
                3 => ("landuse", "industrial"),
                _ => ("building", "yes"),
            };
            let ring: Vec<i64> = [(0.0, 0.0), (70.0, 0.0), (70.0, 70.0), (0.0, 70.0)]
                .iter()
                .map(|(dx, dy)| node(&mut nodes, x0 + dx, y0 + dy))
                .collect();
            way(&mut ways, &[ring[0], ring[1], ring[2], ring[3], ring[0]], &[tag]);
        }
    }
    let a = node(&mut nodes, 0.0, 50.0);
    let b = node(&mut nodes, span, 50.0 + span / 3.0);
    way(&mut ways, &[a, b], &[("railway", "tram")]);

    format!("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\">\n{nodes}{ways}</osm>\n")
}

/// Distinct Czech-looking street names. Two-letter prefixes repeat only
/// every 108 names.
pub fn street_name(i: usize) -> String {
    let onset = ONSETS[i % ONSETS.len()];
    let vowel = VOWELS[(i / ONSETS.len()) % VOWELS.len()];
    let coda = CODAS[(i / (ONSETS.len() * VOWELS.len())) % CODAS.len()];
    let ending = ["ova", "ská", "á", "ní"][(i / (ONSETS.len() * VOWELS.len() * CODAS.len())) % 4];
    let mut name = format!("{onset}{vowel}{coda}{ending}");
    name.replace_range(..onset.len(), &onset.to_uppercase());
    name
}
