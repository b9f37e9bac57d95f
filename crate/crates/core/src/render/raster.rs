//! Three-color pixel canvas with center-sampled fills. Coordinates are
//! pixels as floats; pixel `(i, j)` has its center at `(i + 0.5, j + 0.5)`.

use serde::Serialize;

use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[repr(u8)]
pub enum Color {
    White = 0,
    /// Tactile: rises on swell paper.
    Black = 1,
    /// Visual only.
    Green = 2,
}

impl Color {
    pub fn rgb(self) -> [u8; 3] {
        match self {
            Color::White => [0xFF, 0xFF, 0xFF],
            Color::Black => [0x00, 0x00, 0x00],
            Color::Green => [0x66, 0xBB, 0x66],
        }
    }

    fn from_index(i: u8) -> Color {
        match i {
            0 => Color::White,
            1 => Color::Black,
            _ => Color::Green,
        }
    }

    /// Darkness order used when downscaling: black over green over white.
    fn darkness(self) -> u8 {
        match self {
            Color::White => 0,
            Color::Green => 1,
            Color::Black => 2,
        }
    }
}

/// How a covered pixel changes.
#[derive(Clone, Copy)]
pub enum Paint<'a> {
    Set(Color),
    /// Only pixels that are currently white.
    OnWhite(Color),
    /// Black becomes white, other colors stay.
    ClearBlack,
    /// `Set` where the predicate holds for the pixel center.
    Masked(Color, &'a dyn Fn(Point) -> bool),
    /// `OnWhite` where the predicate holds.
    MaskedOnWhite(Color, &'a dyn Fn(Point) -> bool),
}

/// Half-open pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PxRect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl PxRect {
    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canvas {
    width: usize,
    height: usize,
    data: Vec<u8>,
    clip: PxRect,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![Color::White as u8; width * height],
            clip: PxRect {
                x0: 0,
                y0: 0,
                x1: width as i64,
                y1: height as i64,
            },
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Color {
        Color::from_index(self.data[y * self.width + x])
    }

    /// Restricts all later drawing to `r` (intersected with the canvas).
    pub fn set_clip(&mut self, r: PxRect) {
        self.clip = PxRect {
            x0: r.x0.max(0),
            y0: r.y0.max(0),
            x1: r.x1.min(self.width as i64),
            y1: r.y1.min(self.height as i64),
        };
    }

    pub fn reset_clip(&mut self) {
        self.set_clip(PxRect {
            x0: 0,
            y0: 0,
            x1: self.width as i64,
            y1: self.height as i64,
        });
    }

    fn apply(&mut self, x: i64, y: i64, paint: Paint<'_>) {
        let idx = y as usize * self.width + x as usize;
        let cur = self.data[idx];
        self.data[idx] = match paint {
            Paint::Set(c) => c as u8,
            Paint::OnWhite(c) if cur == Color::White as u8 => c as u8,
            Paint::OnWhite(_) => cur,
            Paint::ClearBlack if cur == Color::Black as u8 => Color::White as u8,
            Paint::ClearBlack => cur,
            Paint::Masked(c, f) => {
                if f(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    c as u8
                } else {
                    cur
                }
            }
            Paint::MaskedOnWhite(c, f) => {
                if cur == Color::White as u8 && f(Point::new(x as f64 + 0.5, y as f64 + 0.5)) {
                    c as u8
                } else {
                    cur
                }
            }
        };
    }

    /// Paints pixels whose centers lie in `[xa, xb]` on row `y`.
    fn span_closed(&mut self, y: i64, xa: f64, xb: f64, paint: Paint<'_>) {
        let i0 = ((xa - 0.5).ceil() as i64).max(self.clip.x0);
        let i1 = ((xb - 0.5).floor() as i64).min(self.clip.x1 - 1);
        for x in i0..=i1 {
            self.apply(x, y, paint);
        }
    }

    /// Paints pixels whose centers lie in `[xa, xb)` on row `y`.
    fn span_half_open(&mut self, y: i64, xa: f64, xb: f64, paint: Paint<'_>) {
        let i0 = ((xa - 0.5).ceil() as i64).max(self.clip.x0);
        let i1 = ((xb - 0.5).ceil() as i64).min(self.clip.x1);
        for x in i0..i1 {
            self.apply(x, y, paint);
        }
    }

    fn rows(&self, ymin: f64, ymax: f64) -> std::ops::Range<i64> {
        let j0 = ((ymin - 0.5).ceil() as i64).max(self.clip.y0);
        let j1 = ((ymax - 0.5).floor() as i64 + 1).min(self.clip.y1);
        j0..j1.max(j0)
    }

    /// Fills a convex region given by its per-row x interval.
    pub fn fill_convex_rows(
        &mut self,
        ymin: f64,
        ymax: f64,
        row: impl Fn(f64) -> Option<(f64, f64)>,
        paint: Paint<'_>,
    ) {
        for y in self.rows(ymin, ymax) {
            if let Some((a, b)) = row(y as f64 + 0.5) {
                self.span_closed(y, a, b, paint);
            }
        }
    }

    /// Even-odd fill of a set of closed rings.
    pub fn fill_polygon(&mut self, rings: &[Vec<Point>], paint: Paint<'_>) {
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in rings.iter().flatten() {
            ymin = ymin.min(p.y);
            ymax = ymax.max(p.y);
        }
        if !ymin.is_finite() {
            return;
        }
        let mut xs = Vec::new();
        for y in self.rows(ymin, ymax) {
            let yc = y as f64 + 0.5;
            xs.clear();
            for ring in rings {
                for e in ring.windows(2) {
                    let (a, b) = (e[0], e[1]);
                    if (a.y <= yc) != (b.y <= yc) {
                        xs.push(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
                    }
                }
            }
            xs.sort_by(f64::total_cmp);
            for pair in xs.chunks_exact(2) {
                self.span_half_open(y, pair[0], pair[1], paint);
            }
        }
    }

    pub fn fill_convex_polygon(&mut self, poly: &[Point], paint: Paint<'_>) {
        let ymin = poly.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
        let ymax = poly.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
        self.fill_convex_rows(ymin, ymax, |yc| convex_row(poly, yc), paint);
    }

    pub fn fill_disk(&mut self, c: Point, r: f64, paint: Paint<'_>) {
        self.fill_convex_rows(c.y - r, c.y + r, |yc| disk_row(c, r, yc), paint);
    }

    /// All pixels within `r` of the segment `a`–`b` (round caps).
    pub fn fill_capsule(&mut self, a: Point, b: Point, r: f64, paint: Paint<'_>) {
        let len = a.distance(b);
        if len == 0.0 {
            self.fill_disk(a, r, paint);
            return;
        }
        let n = Point::new(-(b.y - a.y) / len * r, (b.x - a.x) / len * r);
        let band = [
            Point::new(a.x + n.x, a.y + n.y),
            Point::new(b.x + n.x, b.y + n.y),
            Point::new(b.x - n.x, b.y - n.y),
            Point::new(a.x - n.x, a.y - n.y),
        ];
        self.fill_convex_rows(
            a.y.min(b.y) - r,
            a.y.max(b.y) + r,
            |yc| {
                [disk_row(a, r, yc), disk_row(b, r, yc), convex_row(&band, yc)]
                    .into_iter()
                    .flatten()
                    .reduce(|x, y| (x.0.min(y.0), x.1.max(y.1)))
            },
            paint,
        );
    }

    /// Axis-aligned pixel block, ignoring the clip.
    pub fn fill_px_rect(&mut self, r: PxRect, color: Color) {
        for y in r.y0.max(0)..r.y1.min(self.height as i64) {
            for x in r.x0.max(0)..r.x1.min(self.width as i64) {
                self.data[y as usize * self.width + x as usize] = color as u8;
            }
        }
    }

    /// Row-major 8-bit RGB.
    pub fn to_rgb(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 3);
        for &i in &self.data {
            out.extend_from_slice(&Color::from_index(i).rgb());
        }
        out
    }

    /// Shrinks by an integer factor; each block takes its darkest color.
    pub fn downscale(&self, factor: usize) -> Canvas {
        let factor = factor.max(1);
        let (w, h) = (self.width / factor, self.height / factor);
        let mut out = Canvas::new(w, h);
        for by in 0..h {
            for bx in 0..w {
                let mut best = Color::White;
                for y in by * factor..(by + 1) * factor {
                    for x in bx * factor..(bx + 1) * factor {
                        let c = self.get(x, y);
                        if c.darkness() > best.darkness() {
                            best = c;
                        }
                    }
                }
                out.data[by * w + bx] = best as u8;
            }
        }
        out
    }

    pub fn count(&self, color: Color) -> usize {
        self.data.iter().filter(|&&c| c == color as u8).count()
    }
}

fn disk_row(c: Point, r: f64, yc: f64) -> Option<(f64, f64)> {
    let dy = yc - c.y;
    let h = r * r - dy * dy;
    (h >= 0.0).then(|| {
        let s = h.sqrt();
        (c.x - s, c.x + s)
    })
}

/// x extent of a convex polygon (vertices in order, not repeated) on row `yc`.
fn convex_row(poly: &[Point], yc: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        if (p.y <= yc && yc <= q.y) || (q.y <= yc && yc <= p.y) {
            if p.y == q.y {
                lo = lo.min(p.x.min(q.x));
                hi = hi.max(p.x.max(q.x));
            } else {
                let x = p.x + (yc - p.y) * (q.x - p.x) / (q.y - p.y);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}
