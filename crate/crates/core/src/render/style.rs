//! Symbol dimensions in sheet millimeters. Loaded from JSON for `--style`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braille::BrailleMetrics;
use crate::mapkey::SymbolClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Fill {
    Solid,
    /// Horizontal bars `thickness` thick every `pitch`.
    HorizontalLines { thickness: f64, pitch: f64 },
    DotGrid { diameter: f64, pitch: f64 },
    /// Two families of 45° bars.
    CrossHatch { thickness: f64, pitch: f64 },
}

/// A stroke along a line. `dash` alternates on/off lengths starting with
/// on; empty means solid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stroke {
    pub width: f64,
    #[serde(default)]
    pub dash: Vec<f64>,
}

impl Stroke {
    pub fn solid(width: f64) -> Self {
        Self {
            width,
            dash: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PointGlyph {
    Disk { diameter: f64 },
    HollowSquare { size: f64, stroke: f64 },
    Cross { size: f64, stroke: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Symbol {
    Area {
        fill: Fill,
        #[serde(default)]
        outline: Option<Stroke>,
    },
    Line {
        stroke: Stroke,
        /// Perpendicular ticks: (length, spacing, width).
        #[serde(default)]
        ticks: Option<(f64, f64, f64)>,
    },
    /// Two rails `width` apart with rungs every `rung_spacing`.
    Ladder {
        width: f64,
        rail: f64,
        rung: f64,
        rung_spacing: f64,
    },
    /// White corridor between black edges.
    Street { corridor: f64, edge: f64 },
    Point { glyph: PointGlyph },
}

#[derive(Debug, Error)]
pub enum StyleError {
    #[error("style JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("style has no symbol for {0}")]
    Missing(SymbolClass),
    #[error("symbol for {class} has the wrong shape")]
    WrongShape { class: SymbolClass },
    #[error("{0}")]
    Corridor(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StyleSheet {
    pub symbols: BTreeMap<SymbolClass, Symbol>,
    pub frame_border: f64,
    pub text_cap_height: f64,
    pub braille: BrailleMetrics,
    pub label_clearance: f64,
}

impl Default for StyleSheet {
    fn default() -> Self {
        use SymbolClass::*;
        let dashed = |width: f64| Stroke {
            width,
            dash: vec![2.0, 1.5],
        };
        let symbols = BTreeMap::from([
            (AreaBuilding, Symbol::Area { fill: Fill::Solid, outline: None }),
            (
                AreaWater,
                Symbol::Area {
                    fill: Fill::HorizontalLines { thickness: 0.5, pitch: 3.0 },
                    outline: Some(dashed(0.8)),
                },
            ),
            (
                AreaGreen,
                Symbol::Area {
                    fill: Fill::DotGrid { diameter: 0.8, pitch: 4.0 },
                    outline: None,
                },
            ),
            (
                AreaIndustrial,
                Symbol::Area {
                    fill: Fill::CrossHatch { thickness: 0.5, pitch: 4.0 },
                    outline: Some(dashed(0.8)),
                },
            ),
            (LineStreetWide, Symbol::Street { corridor: 13.0, edge: 0.8 }),
            (LineStreetNarrow, Symbol::Street { corridor: 5.0, edge: 0.8 }),
            (
                LineTram,
                Symbol::Line {
                    stroke: Stroke { width: 1.0, dash: vec![4.0, 2.0] },
                    ticks: None,
                },
            ),
            (
                LineRail,
                Symbol::Line {
                    stroke: Stroke::solid(1.0),
                    ticks: Some((2.0, 6.0, 0.8)),
                },
            ),
            (
                LineStairs,
                Symbol::Ladder {
                    width: 4.0,
                    rail: 0.8,
                    rung: 0.8,
                    rung_spacing: 2.5,
                },
            ),
            (LineWall, Symbol::Line { stroke: Stroke::solid(1.2), ticks: None }),
            (LineBrook, Symbol::Line { stroke: Stroke::solid(0.8), ticks: None }),
            (
                LineCableway,
                Symbol::Line {
                    stroke: Stroke { width: 1.0, dash: vec![4.0, 1.5, 1.0, 1.5] },
                    ticks: None,
                },
            ),
            (PointTramStop, Symbol::Point { glyph: PointGlyph::Disk { diameter: 4.0 } }),
            (
                PointCarPark,
                Symbol::Point { glyph: PointGlyph::HollowSquare { size: 5.0, stroke: 0.8 } },
            ),
            (
                PointChurch,
                Symbol::Point { glyph: PointGlyph::Cross { size: 5.0, stroke: 1.0 } },
            ),
        ]);
        Self {
            symbols,
            frame_border: 0.5,
            text_cap_height: 3.5,
            braille: BrailleMetrics::default(),
            label_clearance: 1.5,
        }
    }
}

impl StyleSheet {
    pub fn from_json(text: &str) -> Result<Self, StyleError> {
        let style: StyleSheet = serde_json::from_str(text)?;
        style.validate()?;
        Ok(style)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("style serializes")
    }

    pub fn symbol(&self, class: SymbolClass) -> Option<&Symbol> {
        self.symbols.get(&class)
    }

    /// Total width of a street symbol (corridor plus both edges).
    pub fn street_width(&self, class: SymbolClass) -> Option<f64> {
        match self.symbol(class)? {
            Symbol::Street { corridor, edge } => Some(corridor + 2.0 * edge),
            _ => None,
        }
    }

    /// Every drawable class has a symbol of matching shape; the wide
    /// corridor holds a Braille line with clearance and the narrow one
    /// cannot.
    pub fn validate(&self) -> Result<(), StyleError> {
        for class in SymbolClass::DRAWABLE {
            let s = self.symbol(class).ok_or(StyleError::Missing(class))?;
            let ok = match s {
                Symbol::Area { .. } => class.is_area(),
                Symbol::Street { .. } => class.is_street(),
                Symbol::Line { .. } | Symbol::Ladder { .. } => class.is_line() && !class.is_street(),
                Symbol::Point { .. } => class.is_point(),
            };
            if !ok {
                return Err(StyleError::WrongShape { class });
            }
        }
        let cell = self.braille.cell_height();
        if let Some(Symbol::Street { corridor, .. }) = self.symbol(SymbolClass::LineStreetWide) {
            if *corridor < cell + 2.0 * self.label_clearance {
                return Err(StyleError::Corridor(format!(
                    "wide corridor {corridor} mm is narrower than a Braille line with clearance"
                )));
            }
        }
        if let Some(Symbol::Street { corridor, .. }) = self.symbol(SymbolClass::LineStreetNarrow) {
            if *corridor >= cell {
                return Err(StyleError::Corridor(format!(
                    "narrow corridor {corridor} mm must stay below the cell height {cell} mm"
                )));
            }
        }
        Ok(())
    }
}
