//! Properties that hold across modules, over generated maps.

mod common;

use std::collections::{BTreeSet, HashMap};

use common::{Mask, OsmBuilder};
use proptest::prelude::*;
use proptest::sample::select;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use tactmap_core::braille::encode;
use tactmap_core::geodata::unproject;
use tactmap_core::layout::{resolve_conflicts, LabelTarget};
use tactmap_core::render::frame_px;
use tactmap_core::sheetgrid::adjacency;
use tactmap_core::{
    parse_osm, render_sheet, Alphabet, Pipeline, Point, ProjectionConfig, SheetId, SheetSpec, SymbolClass,
};

const DPI: u32 = 100;

const NAMES: &[&str] = &[
    "Dlouhá", "Dlážděná", "Nová", "Novákova", "Krátká", "Karlova", "Na Příkopě", "U Lípy", "Husova",
    "Hybernská", "Žitná", "Žatecká",
];

const LOOSE_TAGS: &[(&str, &str)] = &[
    ("building", "yes"),
    ("building", "church"),
    ("amenity", "parking"),
    ("landuse", "industrial"),
    ("natural", "water"),
    ("leisure", "park"),
    ("railway", "tram"),
    ("railway", "tram_stop"),
    ("waterway", "stream"),
    ("highway", "footway"),
    ("highway", "residential"),
];

#[derive(Debug, Clone)]
enum Item {
    Street { name: &'static str, from: (f64, f64), to: (f64, f64), wide: bool },
    Rect { tag: (&'static str, &'static str), at: (f64, f64), size: (f64, f64) },
    Node { tag: (&'static str, &'static str), at: (f64, f64) },
    Square { name: &'static str, at: (f64, f64), size: f64 },
}

/// Coordinates span the 2×1 block C0R0, C1R0 and a little beyond.
fn coord() -> impl Strategy<Value = (f64, f64)> {
    (-40.0..640.0f64, -40.0..465.0f64)
}

fn item() -> impl Strategy<Value = Item> {
    prop_oneof![
        3 => (select(NAMES), coord(), coord(), any::<bool>())
            .prop_map(|(name, from, to, wide)| Item::Street { name, from, to, wide }),
        3 => (select(LOOSE_TAGS), coord(), (4.0..60.0f64, 4.0..60.0f64))
            .prop_map(|(tag, at, size)| Item::Rect { tag, at, size }),
        1 => (select(LOOSE_TAGS), coord()).prop_map(|(tag, at)| Item::Node { tag, at }),
        1 => (select(NAMES), coord(), 20.0..80.0f64).prop_map(|(name, at, size)| Item::Square { name, at, size }),
    ]
}

fn build(items: &[Item]) -> OsmBuilder {
    let mut osm = OsmBuilder::new();
    for it in items {
        match *it {
            Item::Street { name, from, to, wide } => {
                let class = if wide { "primary" } else { "residential" };
                osm.way(&[from, to], &[("highway", class), ("name", name)]);
            }
            Item::Rect { tag, at, size } => {
                osm.rect(at.0, at.1, at.0 + size.0, at.1 + size.1, &[tag]);
            }
            Item::Node { tag, at } => {
                osm.node(at.0, at.1, &[tag]);
            }
            Item::Square { name, at, size } => {
                osm.rect(at.0, at.1, at.0 + size, at.1 + size, &[("place", "square"), ("name", name)]);
            }
        }
    }
    osm
}

fn block() -> BTreeSet<SheetId> {
    BTreeSet::from([SheetId::new(0, 0), SheetId::new(1, 0)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Lettering and class limits on every sheet, job-wide abbreviation
    /// uniqueness and a complete abbreviation list.
    #[test]
    fn plan_invariants(items in prop::collection::vec(item(), 1..40)) {
        let pipeline = Pipeline::new(build(&items).store());
        let plan = pipeline.plan(&block()).unwrap();
        let metrics = pipeline.style.braille;
        let spec = SheetSpec::a4();
        let (frame, band) = (spec.frame_mm(), spec.designation_band_mm());

        let mut letters = BTreeSet::new();
        for a in &plan.abbreviations {
            prop_assert!(letters.insert(a.letters.clone()), "{:?} used twice", a.letters);
            prop_assert_eq!(a.letters.chars().count(), a.kind.letter_count());
        }
        let listed: HashMap<&str, bool> = plan.legend.entries().iter().map(|e| (e.letters.as_str(), e.placed)).collect();
        prop_assert_eq!(listed.len(), plan.legend.entries().len());

        for sheet in &plan.sheets {
            let points: BTreeSet<SymbolClass> = sheet.features.iter().map(|f| f.class).filter(|c| c.is_point()).collect();
            let areas: BTreeSet<SymbolClass> = sheet.features.iter().map(|f| f.class).filter(|c| c.is_area()).collect();
            prop_assert!(points.len() <= 3 && areas.len() <= 4);

            for (i, a) in sheet.labels.iter().enumerate() {
                let inflated = a.inflated_box(&metrics);
                for b in &sheet.labels[i + 1..] {
                    prop_assert!(!inflated.overlaps(&b.inflated_box(&metrics)), "{} overlaps {}", a.letters, b.letters);
                }
                let room = if a.target == LabelTarget::Designation { band } else { frame };
                for c in a.label_box(&metrics).corners() {
                    prop_assert!(room.expand(1e-9).contains_point(c), "{} leaves its area", a.letters);
                }
                if a.target != LabelTarget::Designation {
                    prop_assert_eq!(listed.get(a.letters.as_str()), Some(&true), "{} not listed as placed", &a.letters);
                }
            }
        }
    }

    /// Inside every label's inflated box the only black pixels are dots,
    /// and every pixel uses one of the three sheet colors.
    #[test]
    fn knockout_and_colors(items in prop::collection::vec(item(), 1..30)) {
        let pipeline = Pipeline::new(build(&items).store());
        let plan = pipeline.plan(&BTreeSet::from([SheetId::new(0, 0)])).unwrap();
        let content = &plan.sheets[0];
        let png = render_sheet(content, &pipeline.style, DPI).to_png();
        prop_assert!(colors_are_allowed(&png));

        let mask = Mask::from_png(&png);
        let spec = SheetSpec::a4();
        let frame = frame_px(&spec, DPI);
        let k = DPI as f64 / 25.4;
        let to_px = |p: Point| Point::new(frame.x0 as f64 + (p.x - spec.margin_left_mm) * k, frame.y0 as f64 + (p.y - spec.margin_top_mm) * k);
        let metrics = pipeline.style.braille;
        let r = metrics.dot_diameter / 2.0 * k;
        for label in &content.labels {
            let b = label.inflated_box(&metrics);
            let dots: Vec<Point> = label.dot_centers(&metrics).into_iter().map(to_px).collect();
            for y in 0..mask.height {
                for x in 0..mask.width {
                    if !mask.black(x, y) {
                        continue;
                    }
                    let c = Point::new(x as f64 + 0.5, y as f64 + 0.5);
                    let mm = Point::new((c.x - frame.x0 as f64) / k + spec.margin_left_mm, (c.y - frame.y0 as f64) / k + spec.margin_top_mm);
                    let local = b.to_local(mm);
                    if local.x.abs() >= b.half_w - 1e-9 || local.y.abs() >= b.half_h - 1e-9 {
                        continue;
                    }
                    prop_assert!(
                        dots.iter().any(|d| (d.x - c.x).hypot(d.y - c.y) <= r + 1e-9),
                        "black pixel ({}, {}) under {:?} is not on a dot", x, y, label.letters
                    );
                }
            }
        }
    }

    /// Conflict resolution ignores input order.
    #[test]
    fn resolution_is_order_independent(items in prop::collection::vec(item(), 1..40), seed in any::<u64>()) {
        let pipeline = Pipeline::new(build(&items).store());
        let plan = pipeline.plan(&BTreeSet::from([SheetId::new(0, 0)])).unwrap();
        let labels = plan.sheets[0].labels.clone();
        let metrics = pipeline.style.braille;
        let once = resolve_conflicts(labels.clone(), &metrics);
        let mut shuffled = labels;
        shuffled.shuffle(&mut StdRng::seed_from_u64(seed));
        prop_assert_eq!(once, resolve_conflicts(shuffled, &metrics));
    }

    /// Every tag in the document ends up on exactly one feature.
    #[test]
    fn tags_survive_parsing(tagged in prop::collection::vec((select(LOOSE_TAGS), coord(), 0..2u8), 1..30)) {
        let mut osm = OsmBuilder::new();
        let mut expected: Vec<(String, String)> = Vec::new();
        for (i, (tag, at, shape)) in tagged.iter().enumerate() {
            let serial = i.to_string();
            let tags = [*tag, ("test:serial", serial.as_str())];
            if *shape == 0 {
                osm.node(at.0, at.1, &tags);
            } else {
                osm.rect(at.0, at.1, at.0 + 10.0, at.1 + 7.0, &tags);
            }
            expected.extend(tags.iter().map(|(k, v)| (k.to_string(), v.to_string())));
        }
        let store = osm.store();
        let mut found: Vec<(String, String)> = store
            .features()
            .iter()
            .flat_map(|f| f.tags.iter().map(|(k, v)| (k.to_owned(), v.to_owned())))
            .collect();
        expected.sort();
        found.sort();
        prop_assert_eq!(found, expected);
    }

    /// One cell per letter plus one number sign per digit run.
    #[test]
    fn encode_length(parts in prop::collection::vec(("[a-zčďěňřšťůž]{0,4}", "[0-9]{0,3}"), 1..6)) {
        let text: String = parts.iter().map(|(l, d)| format!("{l}{d}")).collect();
        let letters = text.chars().filter(|c| c.is_alphabetic()).count();
        let digits = text.chars().filter(|c| c.is_ascii_digit()).count();
        let mut runs = 0;
        let mut prev = false;
        for c in text.chars() {
            let d = c.is_ascii_digit();
            if d && !prev {
                runs += 1;
            }
            prev = d;
        }
        let cells = encode(&text, &Alphabet::czech()).unwrap();
        prop_assert_eq!(cells.len(), letters + digits + runs);
    }

    /// Any selection the grid calls connected is accepted by a job, any
    /// other is refused.
    #[test]
    fn selection_follows_adjacency(cells in prop::collection::btree_set((0..4i64, 0..4i64), 1..6)) {
        let ids: BTreeSet<SheetId> = cells.iter().map(|&(c, r)| SheetId::new(c, r)).collect();
        let pipeline = Pipeline::new(OsmBuilder::new().store());
        prop_assert_eq!(pipeline.plan(&ids).is_ok(), adjacency(&ids));
    }
}

fn colors_are_allowed(png_bytes: &[u8]) -> bool {
    let mut dec = png::Decoder::new(std::io::Cursor::new(png_bytes)).read_info().unwrap();
    let mut buf = vec![0; dec.output_buffer_size().unwrap()];
    let info = dec.next_frame(&mut buf).unwrap();
    let n = info.width as usize * info.height as usize * 3;
    let green = tactmap_core::render::Color::Green.rgb();
    buf[..n]
        .chunks_exact(3)
        .all(|p| p == [0, 0, 0] || p == [255, 255, 255] || p == green)
}

#[test]
fn projection_is_shared_with_the_parser() {
    // A node placed through the inverse projection lands where it was put.
    let cfg = ProjectionConfig::default();
    let ll = unproject(Point::new(123.0, 45.0), &cfg);
    let xml = format!(
        r#"<osm><node id="1" lat="{}" lon="{}"><tag k="railway" v="tram_stop"/></node></osm>"#,
        ll.lat, ll.lon
    );
    let store = parse_osm(xml.as_bytes(), &cfg).unwrap();
    let g = store.features()[0].geometry.bbox();
    assert!((g.min_x - 123.0).abs() < 1e-6 && (g.min_y - 45.0).abs() < 1e-6);
}
