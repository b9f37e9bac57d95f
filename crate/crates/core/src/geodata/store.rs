use std::collections::HashMap;

use super::{ParseStats, SourceFeature};
use crate::geom::Rect;

const CELL_M: f64 = 100.0;
/// Features spanning more grid cells than this are kept in a side list
/// that every query scans.
const MAX_CELLS_PER_FEATURE: i64 = 1024;

/// Immutable, id-ordered feature collection with a uniform-grid bbox index.
#[derive(Debug, Clone, Default)]
pub struct FeatureStore {
    features: Vec<SourceFeature>,
    bboxes: Vec<Rect>,
    cells: HashMap<(i64, i64), Vec<u32>>,
    large: Vec<u32>,
    stats: ParseStats,
}

fn cell_range(r: &Rect) -> (i64, i64, i64, i64) {
    (
        (r.min_x / CELL_M).floor() as i64,
        (r.min_y / CELL_M).floor() as i64,
        (r.max_x / CELL_M).floor() as i64,
        (r.max_y / CELL_M).floor() as i64,
    )
}

impl FeatureStore {
    /// Builds a store. Features are sorted by id; duplicate ids panic.
    pub fn new(features: Vec<SourceFeature>) -> Self {
        Self::with_stats(features, ParseStats::default())
    }

    pub(crate) fn with_stats(mut features: Vec<SourceFeature>, stats: ParseStats) -> Self {
        features.sort_by_key(|f| f.id);
        assert!(
            features.windows(2).all(|w| w[0].id != w[1].id),
            "feature ids must be unique"
        );
        let bboxes: Vec<Rect> = features.iter().map(|f| f.geometry.bbox()).collect();
        let mut cells: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
        let mut large = Vec::new();
        for (i, bb) in bboxes.iter().enumerate() {
            let (x0, y0, x1, y1) = cell_range(bb);
            if (x1 - x0 + 1).saturating_mul(y1 - y0 + 1) > MAX_CELLS_PER_FEATURE {
                large.push(i as u32);
                continue;
            }
            for cx in x0..=x1 {
                for cy in y0..=y1 {
                    cells.entry((cx, cy)).or_default().push(i as u32);
                }
            }
        }
        Self {
            features,
            bboxes,
            cells,
            large,
            stats,
        }
    }

    pub fn features(&self) -> &[SourceFeature] {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn stats(&self) -> &ParseStats {
        &self.stats
    }

    pub fn get(&self, id: i64) -> Option<&SourceFeature> {
        self.features
            .binary_search_by_key(&id, |f| f.id)
            .ok()
            .map(|i| &self.features[i])
    }

    /// Union of all feature bounding boxes.
    pub fn extent(&self) -> Option<Rect> {
        self.bboxes.iter().copied().reduce(|a, b| a.union(&b))
    }

    /// Features whose bounding box intersects `rect` (closed intervals), in
    /// ascending id order.
    pub fn query_bbox(&self, rect: &Rect) -> Vec<&SourceFeature> {
        if !(rect.max_x >= rect.min_x && rect.max_y >= rect.min_y) {
            return Vec::new();
        }
        let (x0, y0, x1, y1) = cell_range(rect);
        let mut hits: Vec<u32> = Vec::new();
        let cell_count = (x1 - x0 + 1).saturating_mul(y1 - y0 + 1);
        if cell_count as usize > self.cells.len() {
            for (&(cx, cy), ids) in &self.cells {
                if (x0..=x1).contains(&cx) && (y0..=y1).contains(&cy) {
                    hits.extend(ids);
                }
            }
        } else {
            for cx in x0..=x1 {
                for cy in y0..=y1 {
                    if let Some(ids) = self.cells.get(&(cx, cy)) {
                        hits.extend(ids);
                    }
                }
            }
        }
        hits.extend(&self.large);
        hits.sort_unstable();
        hits.dedup();
        hits.into_iter()
            .filter(|&i| self.bboxes[i as usize].intersects(rect))
            .map(|i| &self.features[i as usize])
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geodata::{Geometry, OsmRef, Tags};
    use crate::geom::Point;
    use proptest::prelude::*;

    fn feature(id: i64, geometry: Geometry) -> SourceFeature {
        SourceFeature::new(id, OsmRef::Node(id), geometry, Tags::new())
    }

    #[test]
    fn empty_store_returns_nothing() {
        let store = FeatureStore::new(Vec::new());
        assert!(store
            .query_bbox(&Rect::new(-1e6, -1e6, 1e6, 1e6))
            .is_empty());
        assert!(store.extent().is_none());
    }

    #[test]
    fn full_extent_returns_everything() {
        let store = FeatureStore::new(vec![
            feature(3, Geometry::Point(Point::new(10.0, 10.0))),
            feature(1, Geometry::Point(Point::new(-500.0, 20.0))),
            feature(
                2,
                Geometry::Polyline(vec![Point::new(0.0, 0.0), Point::new(900.0, 700.0)]),
            ),
        ]);
        let all = store.query_bbox(&store.extent().unwrap());
        assert_eq!(all.iter().map(|f| f.id).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(store.get(2).unwrap().id, 2);
        assert!(store.get(4).is_none());
    }

    fn arb_geometry() -> impl Strategy<Value = Geometry> {
        let pt = (-2000.0f64..2000.0, -2000.0f64..2000.0).prop_map(|(x, y)| Point::new(x, y));
        prop_oneof![
            pt.clone().prop_map(Geometry::Point),
            (pt, 1.0f64..3000.0, 1.0f64..3000.0).prop_map(|(a, w, h)| Geometry::Polyline(vec![
                a,
                Point::new(a.x + w, a.y + h)
            ])),
        ]
    }

    proptest! {
        #[test]
        fn query_matches_linear_scan(
            geoms in proptest::collection::vec(arb_geometry(), 0..60),
            (x, y, w, h) in (-2500.0f64..2500.0, -2500.0f64..2500.0, 0.1f64..1500.0, 0.1f64..1500.0),
        ) {
            let features: Vec<_> = geoms
                .into_iter()
                .enumerate()
                .map(|(i, g)| feature(i as i64 * 7 - 50, g))
                .collect();
            let rect = Rect::new(x, y, x + w, y + h);
            let mut expected: Vec<i64> = features
                .iter()
                .filter(|f| f.geometry.bbox().intersects(&rect))
                .map(|f| f.id)
                .collect();
            expected.sort();
            let store = FeatureStore::new(features);
            let got: Vec<i64> = store.query_bbox(&rect).iter().map(|f| f.id).collect();
            prop_assert_eq!(got, expected);
        }
    }
}
