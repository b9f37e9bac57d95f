//! Place search. The local TSV gazetteer is the default backend.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tactmap_core::LonLat;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaceKind {
    Address,
    Street,
    Square,
}

/// One searchable place. Streets carry the coordinate of their midpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub name: String,
    pub lon_lat: LonLat,
    pub kind: PlaceKind,
}

/// Backend boundary for place search.
pub trait Geocoder: Send + Sync {
    fn search(&self, query: &str) -> Vec<GazetteerEntry>;
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("gazetteer line {line}: {message}")]
pub struct GazetteerError {
    pub line: usize,
    pub message: String,
}

/// Tab-separated `name lon lat kind`; `#` starts a comment line.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
}

impl Gazetteer {
    pub fn new(entries: Vec<GazetteerEntry>) -> Self {
        Self { entries }
    }

    pub fn parse(text: &str) -> Result<Self, GazetteerError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let err = |message: String| GazetteerError { line: i + 1, message };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [name, lon, lat, kind] = cols[..] else {
                return Err(err(format!("expected 4 tab-separated columns, got {}", cols.len())));
            };
            let num = |t: &str| t.trim().parse::<f64>().map_err(|e| err(format!("{t:?}: {e}")));
            let (lon, lat) = (num(lon)?, num(lat)?);
            if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
                return Err(err(format!("coordinates out of range: {lon}, {lat}")));
            }
            let kind = match kind.trim() {
                "address" => PlaceKind::Address,
                "street" => PlaceKind::Street,
                "square" => PlaceKind::Square,
                k => return Err(err(format!("unknown kind {k:?}"))),
            };
            if name.trim().is_empty() {
                return Err(err("empty name".into()));
            }
            entries.push(GazetteerEntry {
                name: name.trim().to_owned(),
                lon_lat: LonLat::new(lon, lat),
                kind,
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        Ok(Self::parse(&std::fs::read_to_string(path)?)?)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Geocoder for Gazetteer {
    /// Case-insensitive substring match. Exact matches come first, then
    /// prefix matches, then the rest, each in file order.
    fn search(&self, query: &str) -> Vec<GazetteerEntry> {
        let q = query.trim().to_lowercase();
        if q.is_empty() {
            return Vec::new();
        }
        let mut hits: Vec<(u8, &GazetteerEntry)> = self
            .entries
            .iter()
            .filter_map(|e| {
                let name = e.name.to_lowercase();
                if name == q {
                    Some((0, e))
                } else if name.starts_with(&q) {
                    Some((1, e))
                } else if name.contains(&q) {
                    Some((2, e))
                } else {
                    None
                }
            })
            .collect();
        hits.sort_by_key(|&(rank, _)| rank);
        hits.into_iter().map(|(_, e)| e.clone()).collect()
    }
}
