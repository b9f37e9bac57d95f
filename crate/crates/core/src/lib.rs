//! Tactile map sheets for swell paper from OSM data.
//!
//! Features are parsed and projected ([`geodata`]), classified and
//! generalized by the map key ([`mapkey`]), cut into fixed A4 sheets
//! ([`sheetgrid`]), lettered with Braille abbreviations ([`braille`],
//! [`layout`]) and rasterized ([`render`]). [`pipeline`] ties it together.

pub mod braille;
pub mod geodata;
pub mod geom;
pub mod layout;
pub mod mapkey;
pub mod pipeline;
pub mod render;
pub mod sheetgrid;

pub use braille::{Abbreviation, Alphabet, BrailleCell, BrailleMetrics, Legend};
pub use geodata::{parse_osm, FeatureStore, Geometry, LonLat, ProjectionConfig, SourceFeature};
pub use geom::{Point, Rect};
pub use layout::{LabelPlacement, LayoutConfig, PriorityRank};
pub use mapkey::{ClassificationRules, ClassifiedFeature, SymbolClass};
pub use pipeline::{run_job, ArchiveManifest, JobError, JobOutput, JobRequest, Pipeline, Selection};
pub use render::{mm_to_px, render_legend_sheet, render_sheet, RasterSheet, StyleSheet};
pub use sheetgrid::{SheetId, SheetSpec};
