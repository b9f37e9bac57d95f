//! The tactile map key: which source features are drawn, as what, and how
//! their geometry is generalized for reading by touch.

mod generalize;
mod simplify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geodata::{Geometry, GeometryKind, SourceFeature, Tags};

pub use generalize::{
    corridor_area, demote_dense_streets, generalize, merge_bridge_twins, reduce_block_churches,
    suppress_small, GeneralizeConfig,
};
pub use simplify::{simplify, SimplifyError, DEFAULT_TOLERANCE_M};

/// Map-key category of a feature. Four area fills, eight line symbols and
/// three point symbols; everything else is omitted.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub enum SymbolClass {
    AreaBuilding,
    AreaWater,
    AreaGreen,
    AreaIndustrial,
    LineStreetWide,
    LineStreetNarrow,
    LineTram,
    LineRail,
    LineStairs,
    LineWall,
    LineBrook,
    LineCableway,
    PointTramStop,
    PointCarPark,
    PointChurch,
    Omit,
}

impl SymbolClass {
    /// The fifteen drawable classes in legend order.
    pub const DRAWABLE: [SymbolClass; 15] = [
        SymbolClass::AreaBuilding,
        SymbolClass::AreaWater,
        SymbolClass::AreaGreen,
        SymbolClass::AreaIndustrial,
        SymbolClass::LineStreetWide,
        SymbolClass::LineStreetNarrow,
        SymbolClass::LineTram,
        SymbolClass::LineRail,
        SymbolClass::LineStairs,
        SymbolClass::LineWall,
        SymbolClass::LineBrook,
        SymbolClass::LineCableway,
        SymbolClass::PointTramStop,
        SymbolClass::PointCarPark,
        SymbolClass::PointChurch,
    ];

    pub fn geometry_kind(self) -> Option<GeometryKind> {
        use SymbolClass::*;
        match self {
            AreaBuilding | AreaWater | AreaGreen | AreaIndustrial => Some(GeometryKind::Polygon),
            LineStreetWide | LineStreetNarrow | LineTram | LineRail | LineStairs | LineWall
            | LineBrook | LineCableway => Some(GeometryKind::Polyline),
            PointTramStop | PointCarPark | PointChurch => Some(GeometryKind::Point),
            Omit => None,
        }
    }

    pub fn is_area(self) -> bool {
        self.geometry_kind() == Some(GeometryKind::Polygon)
    }

    pub fn is_line(self) -> bool {
        self.geometry_kind() == Some(GeometryKind::Polyline)
    }

    pub fn is_point(self) -> bool {
        self.geometry_kind() == Some(GeometryKind::Point)
    }

    pub fn is_street(self) -> bool {
        matches!(self, SymbolClass::LineStreetWide | SymbolClass::LineStreetNarrow)
    }

    pub fn name(self) -> &'static str {
        use SymbolClass::*;
        match self {
            AreaBuilding => "AreaBuilding",
            AreaWater => "AreaWater",
            AreaGreen => "AreaGreen",
            AreaIndustrial => "AreaIndustrial",
            LineStreetWide => "LineStreetWide",
            LineStreetNarrow => "LineStreetNarrow",
            LineTram => "LineTram",
            LineRail => "LineRail",
            LineStairs => "LineStairs",
            LineWall => "LineWall",
            LineBrook => "LineBrook",
            LineCableway => "LineCableway",
            PointTramStop => "PointTramStop",
            PointCarPark => "PointCarPark",
            PointChurch => "PointChurch",
            Omit => "Omit",
        }
    }

    /// Caption shown on the legend sheet.
    pub fn caption(self) -> &'static str {
        use SymbolClass::*;
        match self {
            AreaBuilding => "building",
            AreaWater => "water",
            AreaGreen => "green area",
            AreaIndustrial => "industrial",
            LineStreetWide => "street",
            LineStreetNarrow => "narrow street, path",
            LineTram => "tram line",
            LineRail => "railway",
            LineStairs => "stairs",
            LineWall => "wall",
            LineBrook => "brook",
            LineCableway => "cableway",
            PointTramStop => "tram stop",
            PointCarPark => "car park",
            PointChurch => "church",
            Omit => "",
        }
    }

    /// Single Braille letter identifying the class on the legend sheet.
    pub fn code_letter(self) -> char {
        use SymbolClass::*;
        match self {
            AreaBuilding => 'b',
            AreaWater => 'w',
            AreaGreen => 'g',
            AreaIndustrial => 'i',
            LineStreetWide => 's',
            LineStreetNarrow => 'n',
            LineTram => 't',
            LineRail => 'r',
            LineStairs => 'e',
            LineWall => 'l',
            LineBrook => 'k',
            LineCableway => 'c',
            PointTramStop => 'o',
            PointCarPark => 'p',
            PointChurch => 'h',
            Omit => ' ',
        }
    }
}

impl fmt::Display for SymbolClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymbolClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SymbolClass::DRAWABLE
            .iter()
            .chain(std::iter::once(&SymbolClass::Omit))
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown symbol class {s:?}"))
    }
}

/// Importance of a road for demotion and bridge merging; higher is more
/// important, non-roads are 0.
pub fn road_rank(tags: &Tags) -> u8 {
    let Some(hw) = tags.get("highway") else {
        return 0;
    };
    match hw.trim_end_matches("_link") {
        "motorway" => 12,
        "trunk" => 11,
        "primary" => 10,
        "secondary" => 9,
        "tertiary" => 8,
        "unclassified" => 7,
        "residential" => 6,
        "living_street" => 5,
        "pedestrian" => 4,
        "service" => 3,
        "track" => 2,
        "cycleway" | "footway" | "path" | "steps" => 1,
        _ => 0,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    pub key: String,
    /// `None` matches any value.
    pub value: Option<String>,
    pub class: SymbolClass,
}

impl Rule {
    pub fn matches(&self, tags: &Tags) -> bool {
        match (&self.value, tags.get(&self.key)) {
            (_, None) => false,
            (None, Some(_)) => true,
            (Some(want), Some(got)) => want == got,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("rules line {line}: {message}")]
pub struct RulesError {
    pub line: usize,
    pub message: String,
}

pub const DEFAULT_DENSITY_THRESHOLD: f64 = 0.45;

const DEFAULT_RULES: &str = include_str!("../../data/default.rules");

/// Ordered tag predicates plus the narrow-street demotion threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRules {
    pub rules: Vec<Rule>,
    pub density_threshold: f64,
}

impl Default for ClassificationRules {
    fn default() -> Self {
        Self::parse(DEFAULT_RULES).expect("built-in rules parse")
    }
}

impl ClassificationRules {
    /// Parses `<key>=<value|*> -> <SymbolClass>` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, RulesError> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| RulesError {
                line: i + 1,
                message,
            };
            let (pred, class) = line
                .split_once("->")
                .ok_or_else(|| err("expected '<key>=<value> -> <class>'".into()))?;
            let (key, value) = pred
                .trim()
                .split_once('=')
                .ok_or_else(|| err("predicate needs '='".into()))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(err("empty key or value".into()));
            }
            let class = class.trim().parse().map_err(err)?;
            rules.push(Rule {
                key: key.to_owned(),
                value: (value != "*").then(|| value.to_owned()),
                class,
            });
        }
        Ok(Self {
            rules,
            density_threshold: DEFAULT_DENSITY_THRESHOLD,
        })
    }
}

/// First matching rule whose class fits the feature's geometry kind; `Omit`
/// when none does.
pub fn classify(feature: &SourceFeature, rules: &ClassificationRules) -> SymbolClass {
    let kind = feature.geometry.kind();
    rules
        .rules
        .iter()
        .filter(|r| r.matches(&feature.tags))
        .map(|r| r.class)
        .find(|c| *c == SymbolClass::Omit || c.geometry_kind() == Some(kind))
        .unwrap_or(SymbolClass::Omit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifiedFeature {
    pub source: SourceFeature,
    pub class: SymbolClass,
    pub geometry: Geometry,
}

impl ClassifiedFeature {
    pub fn id(&self) -> i64 {
        self.source.id
    }

    pub fn name(&self) -> Option<&str> {
        self.source.name.as_deref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::OsmRef;
    use crate::geom::Point;

    fn feature(tags: &[(&str, &str)], geometry: Geometry) -> SourceFeature {
        SourceFeature::new(1, OsmRef::Way(1), geometry, tags.iter().copied().collect())
    }

    fn square() -> Geometry {
        Geometry::polygon(vec![vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
            Point::new(0.0, 0.0),
        ]])
        .unwrap()
    }

    fn line() -> Geometry {
        Geometry::Polyline(vec![Point::new(0.0, 0.0), Point::new(50.0, 0.0)])
    }

    fn point() -> Geometry {
        Geometry::Point(Point::new(1.0, 1.0))
    }

    #[test]
    fn default_table_examples() {
        let rules = ClassificationRules::default();
        let cases = [
            (vec![("building", "yes")], square(), SymbolClass::AreaBuilding),
            (vec![("highway", "footway")], line(), SymbolClass::LineStreetNarrow),
            (vec![("shop", "bakery")], point(), SymbolClass::Omit),
            (vec![("natural", "water")], square(), SymbolClass::AreaWater),
            (vec![("leisure", "park")], square(), SymbolClass::AreaGreen),
            (vec![("landuse", "industrial")], square(), SymbolClass::AreaIndustrial),
            (vec![("highway", "residential")], line(), SymbolClass::LineStreetWide),
            (vec![("highway", "primary_link")], line(), SymbolClass::LineStreetWide),
            (vec![("railway", "tram")], line(), SymbolClass::LineTram),
            (vec![("railway", "rail")], line(), SymbolClass::LineRail),
            (vec![("highway", "steps")], line(), SymbolClass::LineStairs),
            (vec![("barrier", "wall")], line(), SymbolClass::LineWall),
            (vec![("waterway", "stream")], line(), SymbolClass::LineBrook),
            (vec![("aerialway", "chair_lift")], line(), SymbolClass::LineCableway),
            (vec![("railway", "tram_stop")], point(), SymbolClass::PointTramStop),
            (vec![("amenity", "parking")], point(), SymbolClass::PointCarPark),
            (vec![("amenity", "place_of_worship")], point(), SymbolClass::PointChurch),
            (vec![("building", "no")], square(), SymbolClass::Omit),
            // Kind mismatch falls through to Omit.
            (vec![("amenity", "parking")], square(), SymbolClass::Omit),
            (vec![("aerialway", "station")], point(), SymbolClass::Omit),
            (vec![], line(), SymbolClass::Omit),
        ];
        for (tags, g, want) in cases {
            assert_eq!(classify(&feature(&tags, g), &rules), want, "{tags:?}");
        }
    }

    #[test]
    fn building_church_stays_area_before_reduction() {
        let rules = ClassificationRules::default();
        let f = feature(&[("building", "church"), ("amenity", "place_of_worship")], square());
        assert_eq!(classify(&f, &rules), SymbolClass::AreaBuilding);
    }

    #[test]
    fn rule_file_errors_report_line() {
        let e = ClassificationRules::parse("# c\n\nbuilding=* -> AreaBuilding\nfoo -> Omit\n")
            .unwrap_err();
        assert_eq!(e.line, 4);
        let e = ClassificationRules::parse("a=b -> Nope").unwrap_err();
        assert!(e.message.contains("Nope"));
    }

    #[test]
    fn custom_rules_first_match_wins() {
        let rules = ClassificationRules::parse(
            "highway=residential -> LineStreetNarrow\nhighway=* -> LineStreetWide\n",
        )
        .unwrap();
        assert_eq!(
            classify(&feature(&[("highway", "residential")], line()), &rules),
            SymbolClass::LineStreetNarrow
        );
        assert_eq!(
            classify(&feature(&[("highway", "primary")], line()), &rules),
            SymbolClass::LineStreetWide
        );
    }

    #[test]
    fn class_counts_are_fixed() {
        let d = SymbolClass::DRAWABLE;
        assert_eq!(d.iter().filter(|c| c.is_area()).count(), 4);
        assert_eq!(d.iter().filter(|c| c.is_line()).count(), 8);
        assert_eq!(d.iter().filter(|c| c.is_point()).count(), 3);
        let mut letters: Vec<char> = d.iter().map(|c| c.code_letter()).collect();
        letters.sort();
        letters.dedup();
        assert_eq!(letters.len(), 15);
        for c in d {
            assert_eq!(c.name().parse::<SymbolClass>().unwrap(), c);
        }
    }
}
