//! Swell-paper rasterization of one sheet: drawing in priority order,
//! light-green visual lettering, knockout under Braille labels, dots,
//! frame and designation.

pub mod clip;
mod font;
mod raster;
mod style;

use std::f64::consts::SQRT_2;

use serde::Serialize;

use crate::braille::{encode, Alphabet, BrailleCell, BrailleMetrics};
use crate::geodata::Geometry;
use crate::geom::{OrientedBox, Point, Rect};
use crate::layout::{LabelPlacement, LabelTarget, PriorityRank};
use crate::mapkey::{ClassifiedFeature, SymbolClass};
use crate::sheetgrid::{PageTransform, SheetId, SheetSpec};

use clip::{clip_polyline, ClippedLine};

pub use raster::{Canvas, Color, Paint, PxRect};
pub use style::{Fill, PointGlyph, Stroke, StyleError, StyleSheet, Symbol};

pub const DEFAULT_DPI: u32 = 300;

/// Geometry is clipped this far (paper mm) outside the frame so strokes
/// run on across sheet edges.
pub const OVERLAP_MM: f64 = 13.0;

/// `round(mm · dpi / 25.4)`, ties away from zero.
pub fn mm_to_px(mm: f64, dpi: u32) -> i64 {
    (mm * f64::from(dpi) / 25.4).round() as i64
}

/// A rendered page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterSheet {
    /// `None` for the legend sheet.
    pub sheet: Option<SheetId>,
    pub dpi: u32,
    pub canvas: Canvas,
    /// The map frame in pixels (the legend sheet uses the whole page).
    pub frame_px: PxRect,
}

impl RasterSheet {
    pub fn width(&self) -> usize {
        self.canvas.width()
    }

    pub fn height(&self) -> usize {
        self.canvas.height()
    }

    pub fn pixel(&self, x: usize, y: usize) -> Color {
        self.canvas.get(x, y)
    }

    /// 8-bit RGB PNG with the physical resolution set to the dpi.
    pub fn to_png(&self) -> Vec<u8> {
        encode_png(&self.canvas, self.dpi)
    }

    /// Integer downscale for previews; dpi scales with it.
    pub fn preview(&self, scale: usize) -> RasterSheet {
        let scale = scale.max(1);
        let s = scale as i64;
        RasterSheet {
            sheet: self.sheet,
            dpi: (self.dpi / scale as u32).max(1),
            canvas: self.canvas.downscale(scale),
            frame_px: PxRect {
                x0: self.frame_px.x0 / s,
                y0: self.frame_px.y0 / s,
                x1: self.frame_px.x1 / s,
                y1: self.frame_px.y1 / s,
            },
        }
    }
}

pub fn encode_png(canvas: &Canvas, dpi: u32) -> Vec<u8> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, canvas.width() as u32, canvas.height() as u32);
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Eight);
        let ppm = (f64::from(dpi) / 0.0254).round() as u32;
        enc.set_pixel_dims(Some(png::PixelDimensions {
            xppu: ppm,
            yppu: ppm,
            unit: png::Unit::Meter,
        }));
        let mut w = enc.write_header().expect("in-memory PNG header");
        w.write_image_data(&canvas.to_rgb()).expect("in-memory PNG data");
        w.finish().expect("in-memory PNG end");
    }
    out
}

/// Everything drawn on one sheet. `labels` holds the surviving map labels
/// and the designation.
#[derive(Debug, Clone, Serialize)]
pub struct SheetContent {
    pub id: SheetId,
    #[serde(skip)]
    pub features: Vec<ClassifiedFeature>,
    pub labels: Vec<LabelPlacement>,
}

/// Page millimeters to pixels, and pixels to the pattern plane that keeps
/// fills continuous across sheets.
struct Painter {
    k: f64,
    origin: Point,
    pattern_offset: Point,
}

impl Painter {
    fn px(&self, p: Point) -> Point {
        Point::new(self.origin.x + p.x * self.k, self.origin.y + p.y * self.k)
    }

    fn pattern(&self, px: Point) -> Point {
        Point::new(
            (px.x - self.origin.x) / self.k + self.pattern_offset.x,
            (px.y - self.origin.y) / self.k + self.pattern_offset.y,
        )
    }

    fn capsule(&self, c: &mut Canvas, a: Point, b: Point, width_mm: f64, paint: Paint<'_>) {
        c.fill_capsule(self.px(a), self.px(b), width_mm * self.k / 2.0, paint);
    }

    fn disk(&self, c: &mut Canvas, center: Point, diameter_mm: f64, paint: Paint<'_>) {
        c.fill_disk(self.px(center), diameter_mm * self.k / 2.0, paint);
    }

    fn quad(&self, c: &mut Canvas, corners: &[Point; 4], paint: Paint<'_>) {
        let q: Vec<Point> = corners.iter().map(|p| self.px(*p)).collect();
        c.fill_convex_polygon(&q, paint);
    }
}

/// Intervals of `[s0, s1]` that fall on "on" parts of a dash pattern whose
/// first dash starts at arc length 0.
fn dash_intervals(s0: f64, s1: f64, dash: &[f64]) -> Vec<(f64, f64)> {
    let period: f64 = dash.iter().sum();
    if dash.is_empty() || period <= 0.0 {
        return vec![(s0, s1)];
    }
    let mut out = Vec::new();
    let mut start = (s0 / period).floor() * period;
    while start < s1 {
        let mut pos = start;
        for (i, len) in dash.iter().enumerate() {
            let (a, b) = (pos, pos + len);
            if i % 2 == 0 && b > s0 && a < s1 {
                out.push((a.max(s0), b.min(s1)));
            }
            pos = b;
        }
        start += period;
    }
    out
}

/// Calls `f(s, a, b)` for every segment with its starting arc length.
fn segments(points: &[Point], start: f64, mut f: impl FnMut(f64, Point, Point)) {
    let mut s = start;
    for w in points.windows(2) {
        f(s, w[0], w[1]);
        s += w[0].distance(w[1]);
    }
}

fn unit(a: Point, b: Point) -> Option<Point> {
    let l = a.distance(b);
    (l > 0.0).then(|| Point::new((b.x - a.x) / l, (b.y - a.y) / l))
}

/// Multiples of `spacing` inside `[s0, s1)`.
fn stations(s0: f64, s1: f64, spacing: f64) -> impl Iterator<Item = f64> {
    let first = (s0 / spacing).ceil() as i64;
    (first..)
        .map(move |n| n as f64 * spacing)
        .take_while(move |s| *s < s1)
}

fn draw_stroke(c: &mut Canvas, pt: &Painter, pts: &[Point], start: f64, stroke: &Stroke, paint: Paint<'_>) {
    segments(pts, start, |s, a, b| {
        let len = a.distance(b);
        if len == 0.0 {
            return;
        }
        for (u0, u1) in dash_intervals(s, s + len, &stroke.dash) {
            let p0 = a.lerp(b, (u0 - s) / len);
            let p1 = a.lerp(b, (u1 - s) / len);
            pt.capsule(c, p0, p1, stroke.width, paint);
        }
    });
}

fn draw_ticks(c: &mut Canvas, pt: &Painter, pts: &[Point], start: f64, length: f64, spacing: f64, width: f64) {
    if spacing <= 0.0 {
        return;
    }
    segments(pts, start, |s, a, b| {
        let Some(u) = unit(a, b) else { return };
        let len = a.distance(b);
        let n = Point::new(-u.y * length / 2.0, u.x * length / 2.0);
        for st in stations(s, s + len, spacing) {
            let m = a.lerp(b, (st - s) / len);
            pt.capsule(
                c,
                Point::new(m.x - n.x, m.y - n.y),
                Point::new(m.x + n.x, m.y + n.y),
                width,
                Paint::Set(Color::Black),
            );
        }
    });
}

fn draw_ladder(c: &mut Canvas, pt: &Painter, pts: &[Point], start: f64, ladder: &Symbol) {
    let Symbol::Ladder { width, rail, rung, rung_spacing: spacing } = *ladder else { return };
    segments(pts, start, |s, a, b| {
        let Some(u) = unit(a, b) else { return };
        let len = a.distance(b);
        let n = Point::new(-u.y * width / 2.0, u.x * width / 2.0);
        for side in [-1.0, 1.0] {
            let off = Point::new(n.x * side, n.y * side);
            pt.capsule(
                c,
                Point::new(a.x + off.x, a.y + off.y),
                Point::new(b.x + off.x, b.y + off.y),
                rail,
                Paint::Set(Color::Black),
            );
        }
        if spacing > 0.0 {
            for st in stations(s, s + len, spacing) {
                let m = a.lerp(b, (st - s) / len);
                pt.capsule(
                    c,
                    Point::new(m.x - n.x, m.y - n.y),
                    Point::new(m.x + n.x, m.y + n.y),
                    rung,
                    Paint::Set(Color::Black),
                );
            }
        }
    });
}

fn fill_predicate(fill: &Fill) -> Box<dyn Fn(Point) -> bool + '_> {
    match *fill {
        Fill::Solid => Box::new(|_| true),
        Fill::HorizontalLines { thickness, pitch } => Box::new(move |q| q.y.rem_euclid(pitch) < thickness),
        Fill::DotGrid { diameter, pitch } => Box::new(move |q| {
            let dx = q.x - (q.x / pitch).round() * pitch;
            let dy = q.y - (q.y / pitch).round() * pitch;
            dx * dx + dy * dy <= diameter * diameter / 4.0
        }),
        Fill::CrossHatch { thickness, pitch } => Box::new(move |q| {
            let u = (q.x + q.y) / SQRT_2;
            let v = (q.x - q.y) / SQRT_2;
            u.rem_euclid(pitch) < thickness || v.rem_euclid(pitch) < thickness
        }),
    }
}

fn fill_area(c: &mut Canvas, pt: &Painter, rings_mm: &[Vec<Point>], fill: &Fill) {
    let rings: Vec<Vec<Point>> = rings_mm
        .iter()
        .map(|r| r.iter().map(|p| pt.px(*p)).collect())
        .collect();
    match fill {
        Fill::Solid => c.fill_polygon(&rings, Paint::Set(Color::Black)),
        _ => {
            let pred = fill_predicate(fill);
            let f = |px: Point| pred(pt.pattern(px));
            c.fill_polygon(&rings, Paint::Masked(Color::Black, &f));
        }
    }
}

fn draw_point(c: &mut Canvas, pt: &Painter, at: Point, glyph: &PointGlyph) {
    let black = Paint::Set(Color::Black);
    match *glyph {
        PointGlyph::Disk { diameter } => pt.disk(c, at, diameter, black),
        PointGlyph::HollowSquare { size, stroke } => {
            let h = size / 2.0;
            let sq = |h: f64| {
                [
                    Point::new(at.x - h, at.y - h),
                    Point::new(at.x + h, at.y - h),
                    Point::new(at.x + h, at.y + h),
                    Point::new(at.x - h, at.y + h),
                ]
            };
            pt.quad(c, &sq(h), black);
            pt.quad(c, &sq(h - stroke), Paint::Set(Color::White));
        }
        PointGlyph::Cross { size, stroke } => {
            let h = size / 2.0;
            let s = stroke / 2.0;
            let bar = |x0: f64, y0: f64, x1: f64, y1: f64| {
                [Point::new(x0, y0), Point::new(x1, y0), Point::new(x1, y1), Point::new(x0, y1)]
            };
            pt.quad(c, &bar(at.x - s, at.y - h, at.x + s, at.y + h), black);
            let arm_y = at.y - h / 3.0;
            let arm = size * 0.35;
            pt.quad(c, &bar(at.x - arm, arm_y - s, at.x + arm, arm_y + s), black);
        }
    }
}

/// Green text centered at `center` (page mm), rotated by `angle`, painted
/// only onto white.
fn draw_text(c: &mut Canvas, pt: &Painter, text: &str, center: Point, angle: f64, cap_height: f64) {
    let (chars, cols) = font::prepare(text);
    if cols == 0 {
        return;
    }
    let cell = cap_height / font::GLYPH_ROWS as f64;
    let b = OrientedBox {
        center,
        half_w: cols as f64 * cell / 2.0,
        half_h: cap_height / 2.0,
        axis: Point::new(angle.cos(), -angle.sin()),
    };
    let mm_per_px = 1.0 / pt.k;
    let origin = pt.origin;
    let f = move |px: Point| {
        let mm = Point::new((px.x - origin.x) * mm_per_px, (px.y - origin.y) * mm_per_px);
        let l = b.to_local(mm);
        let col = ((l.x + b.half_w) / cell).floor() as i64;
        let row = ((l.y + b.half_h) / cell).floor() as i64;
        font::text_cell(&chars, col, row)
    };
    pt.quad(c, &b.corners(), Paint::MaskedOnWhite(Color::Green, &f));
}

fn draw_dots(c: &mut Canvas, pt: &Painter, label: &LabelPlacement, metrics: &BrailleMetrics) {
    for d in label.dot_centers(metrics) {
        pt.disk(c, d, metrics.dot_diameter, Paint::Set(Color::Black));
    }
}

fn knockout(c: &mut Canvas, pt: &Painter, label: &LabelPlacement, metrics: &BrailleMetrics) {
    pt.quad(c, &label.inflated_box(metrics).corners(), Paint::ClearBlack);
}

fn page_canvas(spec: &SheetSpec, dpi: u32) -> Canvas {
    Canvas::new(
        mm_to_px(spec.page_width_mm, dpi) as usize,
        mm_to_px(spec.page_height_mm, dpi) as usize,
    )
}

/// Frame rectangle in pixels: origin at the rounded margin, size the
/// rounded frame size.
pub fn frame_px(spec: &SheetSpec, dpi: u32) -> PxRect {
    let x0 = mm_to_px(spec.margin_left_mm, dpi);
    let y0 = mm_to_px(spec.margin_top_mm, dpi);
    PxRect {
        x0,
        y0,
        x1: x0 + mm_to_px(spec.frame_width_mm, dpi),
        y1: y0 + mm_to_px(spec.frame_height_mm, dpi),
    }
}

fn to_page(t: &PageTransform, pts: &[Point]) -> Vec<Point> {
    pts.iter().map(|p| t.to_page(*p)).collect()
}

fn page_lines(t: &PageTransform, pts: &[Point], clip_rect: &Rect) -> Vec<ClippedLine> {
    let m = t.spec.ground_m_per_mm();
    clip_polyline(pts, clip_rect)
        .into_iter()
        .map(|l| ClippedLine {
            points: to_page(t, &l.points),
            start_offset: l.start_offset / m,
        })
        .collect()
}

fn paint_rank(class: SymbolClass) -> u8 {
    PriorityRank::of(class).map_or(0, |r| r as u8)
}

/// Renders one map sheet. Deterministic: identical inputs give identical
/// pixels regardless of feature order.
pub fn render_sheet(content: &SheetContent, style: &StyleSheet, dpi: u32) -> RasterSheet {
    let spec = SheetSpec::a4();
    let t = PageTransform::new(content.id, spec);
    let mut c = page_canvas(&spec, dpi);
    let frame = frame_px(&spec, dpi);
    let k = f64::from(dpi) / 25.4;
    let m = spec.ground_m_per_mm();
    let pt = Painter {
        k,
        origin: Point::new(
            frame.x0 as f64 - spec.margin_left_mm * k,
            frame.y0 as f64 - spec.margin_top_mm * k,
        ),
        pattern_offset: Point::new(
            t.bounds.min_x / m - spec.margin_left_mm,
            -t.bounds.max_y / m - spec.margin_top_mm,
        ),
    };
    let clip_rect = t.bounds.expand(spec.mm_to_ground(OVERLAP_MM));
    let metrics = &style.braille;

    let mut features: Vec<&ClassifiedFeature> = content
        .features
        .iter()
        .filter(|f| f.class != SymbolClass::Omit)
        .collect();
    features.sort_by_key(|f| (std::cmp::Reverse(paint_rank(f.class)), f.class, f.id()));

    c.set_clip(frame);
    let mut streets: Vec<(&ClassifiedFeature, Vec<ClippedLine>)> = Vec::new();
    for f in &features {
        let Some(symbol) = style.symbol(f.class) else { continue };
        match (symbol, &f.geometry) {
            (Symbol::Area { fill, outline }, Geometry::Polygon(rings)) => {
                for part in clip::clip(&f.geometry, &t.bounds, spec.mm_to_ground(OVERLAP_MM)) {
                    if let Geometry::Polygon(clipped) = part {
                        let page: Vec<Vec<Point>> = clipped.iter().map(|r| to_page(&t, r)).collect();
                        fill_area(&mut c, &pt, &page, fill);
                    }
                }
                if let Some(stroke) = outline {
                    for ring in rings {
                        for l in page_lines(&t, ring, &clip_rect) {
                            draw_stroke(&mut c, &pt, &l.points, l.start_offset, stroke, Paint::Set(Color::Black));
                        }
                    }
                }
            }
            (Symbol::Line { stroke, ticks }, Geometry::Polyline(pts)) => {
                for l in page_lines(&t, pts, &clip_rect) {
                    draw_stroke(&mut c, &pt, &l.points, l.start_offset, stroke, Paint::Set(Color::Black));
                    if let Some((length, spacing, width)) = *ticks {
                        draw_ticks(&mut c, &pt, &l.points, l.start_offset, length, spacing, width);
                    }
                }
            }
            (ladder @ Symbol::Ladder { .. }, Geometry::Polyline(pts)) => {
                for l in page_lines(&t, pts, &clip_rect) {
                    draw_ladder(&mut c, &pt, &l.points, l.start_offset, ladder);
                }
            }
            (Symbol::Street { .. }, Geometry::Polyline(pts)) => {
                streets.push((f, page_lines(&t, pts, &clip_rect)));
            }
            (Symbol::Point { glyph }, Geometry::Point(p)) => {
                if !streets.is_empty() {
                    draw_streets(&mut c, &pt, style, &mut streets);
                }
                if clip_rect.contains_point(*p) {
                    draw_point(&mut c, &pt, t.to_page(*p), glyph);
                }
            }
            _ => {}
        }
    }
    draw_streets(&mut c, &pt, style, &mut streets);

    let (designations, map_labels): (Vec<&LabelPlacement>, Vec<&LabelPlacement>) = content
        .labels
        .iter()
        .partition(|l| l.target == LabelTarget::Designation);
    for l in &map_labels {
        draw_text(&mut c, &pt, &l.full_name, l.anchor, l.angle, style.text_cap_height);
    }
    for l in &map_labels {
        knockout(&mut c, &pt, l, metrics);
    }
    for l in &map_labels {
        draw_dots(&mut c, &pt, l, metrics);
    }

    c.reset_clip();
    let b = mm_to_px(style.frame_border, dpi);
    for r in [
        PxRect { x0: frame.x0 - b, y0: frame.y0 - b, x1: frame.x1 + b, y1: frame.y0 },
        PxRect { x0: frame.x0 - b, y0: frame.y1, x1: frame.x1 + b, y1: frame.y1 + b },
        PxRect { x0: frame.x0 - b, y0: frame.y0, x1: frame.x0, y1: frame.y1 },
        PxRect { x0: frame.x1, y0: frame.y0, x1: frame.x1 + b, y1: frame.y1 },
    ] {
        c.fill_px_rect(r, Color::Black);
    }

    let designation = content.id.designation();
    let (_, cols) = font::prepare(&designation);
    let text_w = cols as f64 * style.text_cap_height / font::GLYPH_ROWS as f64;
    draw_text(
        &mut c,
        &pt,
        &designation,
        Point::new(spec.margin_left_mm + text_w / 2.0, spec.margin_top_mm / 2.0),
        0.0,
        style.text_cap_height,
    );
    for l in &designations {
        knockout(&mut c, &pt, l, metrics);
        draw_dots(&mut c, &pt, l, metrics);
    }

    RasterSheet {
        sheet: Some(content.id),
        dpi,
        canvas: c,
        frame_px: frame,
    }
}

/// Black casings of every queued street first, then the white corridors,
/// so crossings merge into open junctions.
fn draw_streets(
    c: &mut Canvas,
    pt: &Painter,
    style: &StyleSheet,
    streets: &mut Vec<(&ClassifiedFeature, Vec<ClippedLine>)>,
) {
    for pass in [Color::Black, Color::White] {
        for (f, lines) in streets.iter() {
            let Some(Symbol::Street { corridor, edge }) = style.symbol(f.class) else { continue };
            let width = if pass == Color::Black { corridor + 2.0 * edge } else { *corridor };
            for l in lines {
                segments(&l.points, 0.0, |_, a, b| pt.capsule(c, a, b, width, Paint::Set(pass)));
                if l.points.len() == 1 {
                    pt.capsule(c, l.points[0], l.points[0], width, Paint::Set(pass));
                }
            }
        }
    }
    streets.clear();
}

/// Layout of the legend sheet: a 3 × 5 grid in class order.
pub struct LegendCell {
    pub class: SymbolClass,
    /// Swatch drawing area in page mm.
    pub swatch_mm: Rect,
    /// Top-left of the Braille code cell in page mm.
    pub code_at: Point,
    /// Left end of the caption baseline row in page mm.
    pub caption_at: Point,
}

pub fn legend_cells() -> Vec<LegendCell> {
    SymbolClass::DRAWABLE
        .iter()
        .enumerate()
        .map(|(i, &class)| {
            let (col, row) = ((i % 3) as f64, (i / 3) as f64);
            let x0 = 10.0 + col * 64.0;
            let y0 = 20.0 + row * 54.0;
            LegendCell {
                class,
                swatch_mm: Rect::new(x0 + 9.0, y0, x0 + 54.0, y0 + 32.0),
                code_at: Point::new(x0, y0),
                caption_at: Point::new(x0, y0 + 36.0),
            }
        })
        .collect()
}

/// One A4 sheet with a swatch, Braille code letter and green caption for
/// each of the fifteen drawable classes.
pub fn render_legend_sheet(style: &StyleSheet, dpi: u32) -> RasterSheet {
    let spec = SheetSpec::a4();
    let mut c = page_canvas(&spec, dpi);
    let k = f64::from(dpi) / 25.4;
    let pt = Painter {
        k,
        origin: Point::new(0.0, 0.0),
        pattern_offset: Point::new(0.0, 0.0),
    };
    let alphabet = Alphabet::latin();
    let metrics = &style.braille;
    let title = "LEGEND";
    let (_, cols) = font::prepare(title);
    let tw = cols as f64 * style.text_cap_height / font::GLYPH_ROWS as f64;
    draw_text(&mut c, &pt, title, Point::new(10.0 + tw / 2.0, 10.0), 0.0, style.text_cap_height);

    for cell in legend_cells() {
        let r = cell.swatch_mm;
        c.set_clip(PxRect {
            x0: (r.min_x * k).round() as i64,
            y0: (r.min_y * k).round() as i64,
            x1: (r.max_x * k).round() as i64,
            y1: (r.max_y * k).round() as i64,
        });
        let mid = r.center();
        let line = [Point::new(r.min_x - 5.0, mid.y), Point::new(r.max_x + 5.0, mid.y)];
        match style.symbol(cell.class) {
            Some(Symbol::Area { fill, outline }) => {
                let inset = r.expand(-2.0);
                let ring = vec![
                    Point::new(inset.min_x, inset.min_y),
                    Point::new(inset.max_x, inset.min_y),
                    Point::new(inset.max_x, inset.max_y),
                    Point::new(inset.min_x, inset.max_y),
                    Point::new(inset.min_x, inset.min_y),
                ];
                fill_area(&mut c, &pt, std::slice::from_ref(&ring), fill);
                if let Some(s) = outline {
                    draw_stroke(&mut c, &pt, &ring, 0.0, s, Paint::Set(Color::Black));
                }
            }
            Some(Symbol::Line { stroke, ticks }) => {
                draw_stroke(&mut c, &pt, &line, 0.0, stroke, Paint::Set(Color::Black));
                if let Some((length, spacing, width)) = *ticks {
                    draw_ticks(&mut c, &pt, &line, 0.0, length, spacing, width);
                }
            }
            Some(ladder @ Symbol::Ladder { .. }) => {
                draw_ladder(&mut c, &pt, &line, 0.0, ladder);
            }
            Some(Symbol::Street { corridor, edge }) => {
                // A whole dead-end stretch, so both rounded ends can be felt.
                let end = corridor / 2.0 + edge + 1.0;
                let (a, b) = (Point::new(r.min_x + end, mid.y), Point::new(r.max_x - end, mid.y));
                pt.capsule(&mut c, a, b, corridor + 2.0 * edge, Paint::Set(Color::Black));
                pt.capsule(&mut c, a, b, *corridor, Paint::Set(Color::White));
            }
            Some(Symbol::Point { glyph }) => draw_point(&mut c, &pt, mid, glyph),
            None => {}
        }
        c.reset_clip();

        let code: BrailleCell = encode(&cell.class.code_letter().to_string(), &alphabet)
            .expect("code letters are latin")[0];
        let pad = (metrics.cell_pitch - metrics.cell_width()) / 2.0;
        for dot in code.dots() {
            let (dx, dy) = metrics.dot_offset(dot);
            pt.disk(
                &mut c,
                Point::new(cell.code_at.x + pad + dx, cell.code_at.y + dy),
                metrics.dot_diameter,
                Paint::Set(Color::Black),
            );
        }
        let (_, cols) = font::prepare(cell.class.caption());
        let w = cols as f64 * style.text_cap_height / font::GLYPH_ROWS as f64;
        draw_text(
            &mut c,
            &pt,
            cell.class.caption(),
            Point::new(cell.caption_at.x + w / 2.0, cell.caption_at.y + style.text_cap_height / 2.0),
            0.0,
            style.text_cap_height,
        );
    }
    let frame = PxRect {
        x0: 0,
        y0: 0,
        x1: c.width() as i64,
        y1: c.height() as i64,
    };
    RasterSheet {
        sheet: None,
        dpi,
        canvas: c,
        frame_px: frame,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mm_to_px_examples() {
        assert_eq!(mm_to_px(25.4, 300), 300);
        assert_eq!(mm_to_px(13.0, 300), 154);
        assert_eq!(mm_to_px(0.0, 300), 0);
        assert_eq!(mm_to_px(210.0, 300), 2480);
        assert_eq!(mm_to_px(297.0, 300), 3508);
        // 0.0508 mm is exactly 0.6 px at 300 dpi; 0.04233 mm is 0.5 px.
        assert_eq!(mm_to_px(25.4 / 600.0, 300), 1);
    }

    #[test]
    fn dashes() {
        assert_eq!(dash_intervals(0.0, 10.0, &[]), vec![(0.0, 10.0)]);
        assert_eq!(
            dash_intervals(0.0, 10.0, &[4.0, 2.0]),
            vec![(0.0, 4.0), (6.0, 10.0)]
        );
        // Phase continues across a cut at 5.
        assert_eq!(dash_intervals(5.0, 10.0, &[4.0, 2.0]), vec![(6.0, 10.0)]);
        assert_eq!(dash_intervals(3.0, 7.0, &[4.0, 2.0]), vec![(3.0, 4.0), (6.0, 7.0)]);
    }

    #[test]
    fn stations_are_global_multiples() {
        let s: Vec<f64> = stations(5.0, 20.0, 6.0).collect();
        assert_eq!(s, vec![6.0, 12.0, 18.0]);
    }

    #[test]
    fn frame_size() {
        let f = frame_px(&SheetSpec::a4(), 300);
        assert_eq!((f.width(), f.height()), (2362, 3346));
    }

    #[test]
    fn fills_are_ground_anchored() {
        let hatch = fill_predicate(&Fill::HorizontalLines { thickness: 0.5, pitch: 3.0 });
        assert!(hatch(Point::new(0.0, 0.2)));
        assert!(!hatch(Point::new(0.0, 0.6)));
        assert!(hatch(Point::new(100.0, -2.9)));
        let dots = fill_predicate(&Fill::DotGrid { diameter: 0.8, pitch: 4.0 });
        assert!(dots(Point::new(4.0, 8.3)));
        assert!(!dots(Point::new(2.0, 2.0)));
    }
}
