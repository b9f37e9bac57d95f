//! The fixed partition of the projected plane into A4 map sheets.
//!
//! Sheet `(col, row)` covers `[col·300, (col+1)·300) × [row·425, (row+1)·425)`
//! meters. At 1:1500 that is a 200 × 283.33 mm frame, placed on an A4 page
//! with narrow margins; the top margin carries the sheet designation.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point, Rect};

/// Rectangle in projected ground meters.
pub type GroundRect = Rect;

pub const GROUND_WIDTH_M: f64 = 300.0;
pub const GROUND_HEIGHT_M: f64 = 425.0;
pub const SCALE_DENOMINATOR: f64 = 1500.0;
pub const PAGE_WIDTH_MM: f64 = 210.0;
pub const PAGE_HEIGHT_MM: f64 = 297.0;

/// Physical layout of a sheet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SheetSpec {
    pub ground_width: f64,
    pub ground_height: f64,
    pub scale_denominator: f64,
    pub frame_width_mm: f64,
    pub frame_height_mm: f64,
    pub page_width_mm: f64,
    pub page_height_mm: f64,
    pub margin_left_mm: f64,
    pub margin_right_mm: f64,
    pub margin_top_mm: f64,
    pub margin_bottom_mm: f64,
}

impl SheetSpec {
    pub fn a4() -> Self {
        let frame_width_mm = GROUND_WIDTH_M * 1000.0 / SCALE_DENOMINATOR;
        let frame_height_mm = GROUND_HEIGHT_M * 1000.0 / SCALE_DENOMINATOR;
        let margin_top_mm = 8.0;
        let margin_left_mm = (PAGE_WIDTH_MM - frame_width_mm) / 2.0;
        let spec = Self {
            ground_width: GROUND_WIDTH_M,
            ground_height: GROUND_HEIGHT_M,
            scale_denominator: SCALE_DENOMINATOR,
            frame_width_mm,
            frame_height_mm,
            page_width_mm: PAGE_WIDTH_MM,
            page_height_mm: PAGE_HEIGHT_MM,
            margin_left_mm,
            margin_right_mm: margin_left_mm,
            margin_top_mm,
            margin_bottom_mm: PAGE_HEIGHT_MM - margin_top_mm - frame_height_mm,
        };
        assert_eq!(spec.frame_width_mm, 200.0);
        assert!((spec.frame_height_mm - 283.333_333).abs() < 1e-3);
        spec
    }

    /// Meters of ground per millimeter of paper.
    pub fn ground_m_per_mm(&self) -> f64 {
        self.scale_denominator / 1000.0
    }

    pub fn ground_to_mm(&self, meters: f64) -> f64 {
        meters / self.ground_m_per_mm()
    }

    pub fn mm_to_ground(&self, mm: f64) -> f64 {
        mm * self.ground_m_per_mm()
    }

    /// Frame rectangle in page millimeters (y down).
    pub fn frame_mm(&self) -> Rect {
        Rect::new(
            self.margin_left_mm,
            self.margin_top_mm,
            self.margin_left_mm + self.frame_width_mm,
            self.margin_top_mm + self.frame_height_mm,
        )
    }

    /// Top margin band in page millimeters.
    pub fn designation_band_mm(&self) -> Rect {
        Rect::new(0.0, 0.0, self.page_width_mm, self.margin_top_mm)
    }
}

impl Default for SheetSpec {
    fn default() -> Self {
        Self::a4()
    }
}

/// Grid address of one sheet. Rows grow northwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SheetId {
    pub col: i64,
    pub row: i64,
}

impl SheetId {
    pub const fn new(col: i64, row: i64) -> Self {
        Self { col, row }
    }

    pub fn designation(&self) -> String {
        self.to_string()
    }

    /// The four edge-sharing neighbors: west, east, south, north.
    pub fn neighbors(&self) -> [SheetId; 4] {
        [
            SheetId::new(self.col - 1, self.row),
            SheetId::new(self.col + 1, self.row),
            SheetId::new(self.col, self.row - 1),
            SheetId::new(self.col, self.row + 1),
        ]
    }

    pub fn bounds(&self) -> GroundRect {
        sheet_bounds(*self)
    }
}

impl fmt::Display for SheetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C{}R{}", self.col, self.row)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid sheet designation {0:?} (expected C<int>R<int>)")]
pub struct DesignationError(pub String);

impl FromStr for SheetId {
    type Err = DesignationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DesignationError(s.to_owned());
        let rest = s.strip_prefix('C').ok_or_else(bad)?;
        let r = rest.find('R').ok_or_else(bad)?;
        let (col, row) = (&rest[..r], &rest[r + 1..]);
        let int = |t: &str| -> Result<i64, DesignationError> {
            let digits = t.strip_prefix('-').unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            // Canonical form only: no leading zeros, no "-0".
            if (digits.len() > 1 && digits.starts_with('0')) || t == "-0" {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        Ok(SheetId::new(int(col)?, int(row)?))
    }
}

pub fn sheet_for_point(p: Point) -> SheetId {
    SheetId::new(
        (p.x / GROUND_WIDTH_M).floor() as i64,
        (p.y / GROUND_HEIGHT_M).floor() as i64,
    )
}

/// Ground rectangle of a sheet; min edges inclusive, max edges exclusive.
/// Neighbors share bit-identical edge values.
pub fn sheet_bounds(id: SheetId) -> GroundRect {
    Rect::new(
        id.col as f64 * GROUND_WIDTH_M,
        id.row as f64 * GROUND_HEIGHT_M,
        (id.col + 1) as f64 * GROUND_WIDTH_M,
        (id.row + 1) as f64 * GROUND_HEIGHT_M,
    )
}

/// Half-open containment matching [`sheet_for_point`].
pub fn sheet_contains(id: SheetId, p: Point) -> bool {
    let b = sheet_bounds(id);
    p.x >= b.min_x && p.x < b.max_x && p.y >= b.min_y && p.y < b.max_y
}

pub fn designation(id: SheetId) -> String {
    id.to_string()
}

/// True iff the set is non-empty and 4-connected.
pub fn adjacency<'a>(ids: impl IntoIterator<Item = &'a SheetId>) -> bool {
    let set: HashSet<SheetId> = ids.into_iter().copied().collect();
    let Some(&start) = set.iter().next() else {
        return false;
    };
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(id) = queue.pop_front() {
        for n in id.neighbors() {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// A `rows × cols` block of sheets around the sheet containing `center`.
/// For even sizes the extra sheet goes east / north.
pub fn block_around(center: Point, rows: u32, cols: u32) -> BTreeSet<SheetId> {
    let c = sheet_for_point(center);
    let col0 = c.col - (cols as i64 - 1) / 2;
    let row0 = c.row - (rows as i64 - 1) / 2;
    (0..cols as i64)
        .flat_map(|dc| (0..rows as i64).map(move |dr| SheetId::new(col0 + dc, row0 + dr)))
        .collect()
}

/// Maps ground meters into page millimeters for one sheet.
#[derive(Debug, Clone, Copy)]
pub struct PageTransform {
    pub spec: SheetSpec,
    pub bounds: GroundRect,
}

impl PageTransform {
    pub fn new(id: SheetId, spec: SheetSpec) -> Self {
        Self {
            spec,
            bounds: sheet_bounds(id),
        }
    }

    pub fn to_page(&self, g: Point) -> Point {
        let k = 1.0 / self.spec.ground_m_per_mm();
        Point::new(
            self.spec.margin_left_mm + (g.x - self.bounds.min_x) * k,
            self.spec.margin_top_mm + (self.bounds.max_y - g.y) * k,
        )
    }

    pub fn to_ground(&self, p: Point) -> Point {
        let k = self.spec.ground_m_per_mm();
        Point::new(
            self.bounds.min_x + (p.x - self.spec.margin_left_mm) * k,
            self.bounds.max_y - (p.y - self.spec.margin_top_mm) * k,
        )
    }
}
