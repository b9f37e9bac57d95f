//! End-to-end job: select sheets, generalize, abbreviate job-wide, lay out
//! and render each sheet, package PNGs and the abbreviation list.

pub mod zip;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::braille::{
    AbbrevError, AbbrevKind, Abbreviation, Abbreviator, Alphabet, BrailleError, Legend, LegendEntry,
};
use crate::geodata::{parse_osm, project, FeatureStore, GeodataError, Geometry, LonLat, ProjectionConfig, SourceFeature};
use crate::geom::{self, Rect};
use crate::layout::{
    place_designation, place_square_label, resolve_with_alternatives, street_label_candidates, LabelPlacement,
    LabelTarget, LayoutConfig,
};
use crate::mapkey::{demote_dense_streets, generalize, ClassificationRules, ClassifiedFeature, GeneralizeConfig, RulesError, SymbolClass};
use crate::render::clip::{clip_polyline, clip_ring};
use crate::render::{render_legend_sheet, render_sheet, SheetContent, StyleError, StyleSheet, OVERLAP_MM};
use crate::sheetgrid::{adjacency, block_around, PageTransform, SheetId, SheetSpec};

pub const ABBREVIATIONS_FILE: &str = "abbreviations.txt";
pub const LEGEND_FILE: &str = "legend.png";
pub const DPI_RANGE: std::ops::RangeInclusive<u32> = 100..=1200;

pub fn sheet_file_name(id: SheetId) -> String {
    format!("sheet_{}.png", id.designation())
}

#[derive(Debug, Error)]
pub enum JobError {
    #[error("selected sheets are not edge-adjacent: {}", .0.join(", "))]
    NonAdjacentSelection(Vec<String>),
    #[error("no sheets selected")]
    EmptySelection,
    #[error("source data: {0}")]
    SourceError(#[from] GeodataError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("rules file line {}: {}", .0.line, .0.message)]
    Rules(RulesError),
    #[error(transparent)]
    Style(#[from] StyleError),
    #[error("alphabet: {0}")]
    Alphabet(#[from] BrailleError),
    #[error("abbreviation: {0}")]
    Abbreviation(#[from] AbbrevError),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Selection {
    Sheets(Vec<SheetId>),
    /// `rows × cols` sheets centered on the sheet containing `center`.
    Block { center: LonLat, rows: u32, cols: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobRequest {
    pub source: PathBuf,
    pub selection: Selection,
    pub dpi: u32,
    pub include_legend: bool,
    pub rules: Option<PathBuf>,
    pub style: Option<PathBuf>,
    pub alphabet: Option<PathBuf>,
    /// Replaces the street density threshold of the rules.
    #[serde(default)]
    pub density_threshold: Option<f64>,
    pub projection: ProjectionConfig,
}

impl JobRequest {
    pub fn new(source: impl Into<PathBuf>, selection: Selection) -> Self {
        Self {
            source: source.into(),
            selection,
            dpi: crate::render::DEFAULT_DPI,
            include_legend: false,
            rules: None,
            style: None,
            alphabet: None,
            density_threshold: None,
            projection: ProjectionConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub length: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ArchiveManifest {
    pub entries: Vec<ManifestEntry>,
}

impl ArchiveManifest {
    pub fn from_files(files: &[(String, Vec<u8>)]) -> Self {
        Self {
            entries: files
                .iter()
                .map(|(name, data)| ManifestEntry {
                    name: name.clone(),
                    length: data.len() as u64,
                    sha256: hex::encode(Sha256::digest(data)),
                })
                .collect(),
        }
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }
}

/// Machine-readable job summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobSummary {
    pub sheets: Vec<String>,
    pub files: Vec<String>,
    pub abbreviations: usize,
}

/// Laid-out content of a job, before rendering.
#[derive(Debug, Clone)]
pub struct JobPlan {
    pub sheets: Vec<SheetContent>,
    pub abbreviations: Vec<Abbreviation>,
    pub legend: Legend,
}

#[derive(Debug, Clone)]
pub struct JobOutput {
    pub plan: JobPlan,
    /// Archive entries in order: sheets, abbreviation list, legend.
    pub files: Vec<(String, Vec<u8>)>,
    pub manifest: ArchiveManifest,
    pub archive: Vec<u8>,
}

impl JobOutput {
    pub fn summary(&self) -> JobSummary {
        JobSummary {
            sheets: self.plan.sheets.iter().map(|s| s.id.designation()).collect(),
            files: self.manifest.names().into_iter().map(String::from).collect(),
            abbreviations: self.plan.legend.entries().len(),
        }
    }

    /// Writes every archive entry as a separate file into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<(), JobError> {
        std::fs::create_dir_all(dir).map_err(|source| JobError::Io {
            path: dir.to_owned(),
            source,
        })?;
        for (name, data) in &self.files {
            let path = dir.join(name);
            std::fs::write(&path, data).map_err(|source| JobError::Io { path, source })?;
        }
        Ok(())
    }
}

/// A named polygon lettered as a square.
pub fn is_square(f: &SourceFeature) -> bool {
    f.name.is_some()
        && matches!(f.geometry, Geometry::Polygon(_))
        && (f.tags.is("place", "square")
            || f.tags.is("highway", "pedestrian")
            || f.tags.is("highway", "living_street"))
}

fn read_file(path: &Path) -> Result<Vec<u8>, JobError> {
    std::fs::read(path).map_err(|source| JobError::Io {
        path: path.to_owned(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String, JobError> {
    String::from_utf8(read_file(path)?)
        .map_err(|_| JobError::InvalidRequest(format!("{} is not UTF-8", path.display())))
}

/// Source data plus the map key, style and alphabet a job runs with.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub store: FeatureStore,
    pub rules: ClassificationRules,
    pub style: StyleSheet,
    pub alphabet: Alphabet,
    pub generalize: GeneralizeConfig,
}

impl Pipeline {
    pub fn new(store: FeatureStore) -> Self {
        Self {
            store,
            rules: ClassificationRules::default(),
            style: StyleSheet::default(),
            alphabet: Alphabet::default(),
            generalize: GeneralizeConfig::default(),
        }
    }

    /// Loads the source and any override files named in the request.
    pub fn from_request(req: &JobRequest) -> Result<Self, JobError> {
        let store = parse_osm(&read_file(&req.source)?, &req.projection)?;
        let mut p = Self::new(store);
        if let Some(path) = &req.rules {
            p.rules = ClassificationRules::parse(&read_text(path)?).map_err(JobError::Rules)?;
        }
        if let Some(path) = &req.style {
            p.style = StyleSheet::from_json(&read_text(path)?)?;
        }
        if let Some(path) = &req.alphabet {
            p.alphabet = Alphabet::default().extended(&read_text(path)?)?;
        }
        if let Some(t) = req.density_threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(JobError::InvalidRequest(format!("density threshold {t} must be a non-negative number")));
            }
            p.rules.density_threshold = t;
        }
        Ok(p)
    }

    fn layout_config(&self) -> LayoutConfig {
        LayoutConfig {
            metrics: self.style.braille,
            clearance: self.style.label_clearance,
            ..LayoutConfig::default()
        }
    }

    /// Turns a selection into a validated, 4-connected sheet set.
    pub fn resolve_selection(
        selection: &Selection,
        projection: &ProjectionConfig,
    ) -> Result<BTreeSet<SheetId>, JobError> {
        let sheets: BTreeSet<SheetId> = match selection {
            Selection::Sheets(ids) => ids.iter().copied().collect(),
            Selection::Block { center, rows, cols } => {
                if *rows == 0 || *cols == 0 {
                    return Err(JobError::InvalidRequest("rows and cols must be at least 1".into()));
                }
                block_around(project(*center, projection)?, *rows, *cols)
            }
        };
        if sheets.is_empty() {
            return Err(JobError::EmptySelection);
        }
        if !adjacency(&sheets) {
            return Err(JobError::NonAdjacentSelection(
                sheets.iter().map(|s| s.designation()).collect(),
            ));
        }
        Ok(sheets)
    }

    /// Generalization, per-sheet demotion, job-wide abbreviation and
    /// per-sheet label layout.
    pub fn plan(&self, sheets: &BTreeSet<SheetId>) -> Result<JobPlan, JobError> {
        if sheets.is_empty() {
            return Err(JobError::EmptySelection);
        }
        if !adjacency(sheets) {
            return Err(JobError::NonAdjacentSelection(
                sheets.iter().map(|s| s.designation()).collect(),
            ));
        }
        let spec = SheetSpec::a4();
        let overlap = spec.mm_to_ground(OVERLAP_MM);
        let extent = sheets
            .iter()
            .map(|s| s.bounds())
            .reduce(|a, b| a.union(&b))
            .expect("non-empty");
        let margin = overlap + self.generalize.bridge_distance_m;
        let general = generalize(
            self.store.query_bbox(&extent.expand(margin)),
            &self.rules,
            &self.generalize,
            &spec,
        );
        let squares: Vec<&SourceFeature> = self
            .store
            .query_bbox(&extent)
            .into_iter()
            .filter(|f| is_square(f))
            .collect();

        let corridor_m = spec.mm_to_ground(self.generalize.wide_corridor_mm);
        let per_sheet: Vec<(SheetId, Vec<ClassifiedFeature>)> = sheets
            .par_iter()
            .map(|&id| {
                let bounds = id.bounds();
                let reach = bounds.expand(overlap);
                let feats: Vec<ClassifiedFeature> = general
                    .iter()
                    .filter(|f| f.geometry.bbox().intersects(&reach))
                    .cloned()
                    .collect();
                (id, demote_dense_streets(feats, &bounds, self.rules.density_threshold, corridor_m))
            })
            .collect();

        // Names needing an abbreviation: wide streets and squares that show
        // on at least one sheet.
        let mut wanted: BTreeMap<(AbbrevKind, String), i64> = BTreeMap::new();
        for (id, feats) in &per_sheet {
            let bounds = id.bounds();
            for f in feats {
                if let (SymbolClass::LineStreetWide, Some(name), Geometry::Polyline(pts)) =
                    (f.class, f.name(), &f.geometry)
                {
                    if !clip_polyline(pts, &bounds).is_empty() {
                        let e = wanted.entry((AbbrevKind::Street, name.to_owned())).or_insert(f.id());
                        *e = (*e).min(f.id());
                    }
                }
            }
            for sq in &squares {
                if polygon_on_sheet(&sq.geometry, &bounds) {
                    let name = sq.name.clone().expect("squares are named");
                    let e = wanted.entry((AbbrevKind::Square, name)).or_insert(sq.id);
                    *e = (*e).min(sq.id);
                }
            }
        }
        let abbreviations = self.abbreviate(&wanted)?;
        let by_name: BTreeMap<(AbbrevKind, &str), &Abbreviation> = abbreviations
            .iter()
            .map(|a| ((a.kind, a.full_name.as_str()), a))
            .collect();

        let cfg = self.layout_config();
        let contents: Vec<SheetContent> = per_sheet
            .into_par_iter()
            .map(|(id, features)| {
                let labels = self.layout_sheet(id, &features, &squares, &by_name, &cfg);
                SheetContent { id, features, labels }
            })
            .collect();

        let placed: HashSet<&str> = contents
            .iter()
            .flat_map(|c| c.labels.iter())
            .filter(|l| l.target != LabelTarget::Designation)
            .map(|l| l.letters.as_str())
            .collect();
        let legend = Legend::new(
            abbreviations
                .iter()
                .map(|a| LegendEntry {
                    letters: a.letters.clone(),
                    full_name: a.full_name.clone(),
                    kind: a.kind,
                    placed: placed.contains(a.letters.as_str()),
                })
                .collect(),
        )
        .expect("abbreviations are unique");
        Ok(JobPlan {
            sheets: contents,
            abbreviations,
            legend,
        })
    }

    /// Abbreviates all names; names without a single writable letter are
    /// left out (they stay unlettered).
    fn abbreviate(&self, wanted: &BTreeMap<(AbbrevKind, String), i64>) -> Result<Vec<Abbreviation>, JobError> {
        let abbr = Abbreviator::new(self.alphabet.clone());
        let mut input: Vec<(i64, String, AbbrevKind)> = wanted
            .iter()
            .map(|((kind, name), id)| (*id, name.clone(), *kind))
            .collect();
        loop {
            match abbr.abbreviate(&input) {
                Ok(v) => return Ok(v),
                Err(AbbrevError::EmptyName(bad)) => input.retain(|(_, n, _)| *n != bad),
                Err(e) => return Err(e.into()),
            }
        }
    }

    fn layout_sheet(
        &self,
        id: SheetId,
        features: &[ClassifiedFeature],
        squares: &[&SourceFeature],
        by_name: &BTreeMap<(AbbrevKind, &str), &Abbreviation>,
        cfg: &LayoutConfig,
    ) -> Vec<LabelPlacement> {
        let spec = SheetSpec::a4();
        let t = PageTransform::new(id, spec);
        let bounds = id.bounds();
        let mut groups: BTreeMap<&str, Vec<(f64, &ClassifiedFeature)>> = BTreeMap::new();
        for f in features {
            if let (SymbolClass::LineStreetWide, Some(name), Geometry::Polyline(pts)) = (f.class, f.name(), &f.geometry) {
                let len: f64 = clip_polyline(pts, &bounds)
                    .iter()
                    .map(|l| geom::polyline_length(&l.points))
                    .sum();
                if len > 0.0 {
                    groups.entry(name).or_default().push((len, f));
                }
            }
        }
        let mut placements = Vec::new();
        for (name, mut ways) in groups {
            let Some(abbr) = by_name.get(&(AbbrevKind::Street, name)) else { continue };
            ways.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.id().cmp(&b.1.id())));
            placements.push(
                ways.iter()
                    .flat_map(|(_, f)| street_label_candidates(f, abbr, &t, &self.alphabet, cfg))
                    .collect::<Vec<_>>(),
            );
        }
        let mut done: HashSet<&str> = HashSet::new();
        for sq in squares {
            let name = sq.name.as_deref().expect("squares are named");
            if done.contains(name) || !polygon_on_sheet(&sq.geometry, &bounds) {
                continue;
            }
            let Some(abbr) = by_name.get(&(AbbrevKind::Square, name)) else { continue };
            if let Some(p) = place_square_label(sq.id, &sq.geometry, abbr, &t, &self.alphabet, cfg) {
                done.insert(name);
                placements.push(vec![p]);
            }
        }
        let mut labels = resolve_with_alternatives(placements, &cfg.metrics);
        labels.push(place_designation(id, &spec, &self.alphabet, cfg));
        labels
    }

    /// Plans, renders sheets in parallel and packages the archive.
    pub fn run(&self, sheets: &BTreeSet<SheetId>, dpi: u32, include_legend: bool) -> Result<JobOutput, JobError> {
        if !DPI_RANGE.contains(&dpi) {
            return Err(JobError::InvalidRequest(format!(
                "dpi {dpi} outside {}..={}",
                DPI_RANGE.start(),
                DPI_RANGE.end()
            )));
        }
        let plan = self.plan(sheets)?;
        let mut files: Vec<(String, Vec<u8>)> = plan
            .sheets
            .par_iter()
            .map(|c| (sheet_file_name(c.id), render_sheet(c, &self.style, dpi).to_png()))
            .collect();
        files.push((ABBREVIATIONS_FILE.to_owned(), plan.legend.to_text()));
        if include_legend {
            files.push((LEGEND_FILE.to_owned(), render_legend_sheet(&self.style, dpi).to_png()));
        }
        let manifest = ArchiveManifest::from_files(&files);
        let archive = zip::write_zip(&files);
        Ok(JobOutput {
            plan,
            files,
            manifest,
            archive,
        })
    }
}

fn polygon_on_sheet(g: &Geometry, bounds: &Rect) -> bool {
    match g {
        Geometry::Polygon(rings) => {
            let r = clip_ring(&rings[0], bounds);
            !r.is_empty() && geom::ring_signed_area(&r).abs() > 0.0
        }
        _ => false,
    }
}

/// Loads everything a request names and runs it.
pub fn run_job(req: &JobRequest) -> Result<JobOutput, JobError> {
    if !DPI_RANGE.contains(&req.dpi) {
        return Err(JobError::InvalidRequest(format!("dpi {} outside 100..=1200", req.dpi)));
    }
    let sheets = Pipeline::resolve_selection(&req.selection, &req.projection)?;
    Pipeline::from_request(req)?.run(&sheets, req.dpi, req.include_legend)
}
