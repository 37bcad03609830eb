//! Synthetic inputs: seeded sketch-like face drawings and random
//! straight-segment instances.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formats::SegmentFile;
use crate::gtsp::{build_instance, GtspInstance, Point};
use crate::image_io::GrayImage;
use crate::trace::LineSegment;

/// `k` straight segments (horizontal, vertical or diagonal, 2 to
/// `extent / 5 + 1` pixels) placed uniformly inside an `extent`-sized
/// square. Home is the origin and each lift costs 30.
pub fn random_instance(k: usize, extent: i32, seed: u64) -> GtspInstance {
    const DIRS: [[i32; 2]; 8] = [[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]];
    assert!(extent >= 2, "extent too small");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let segments = (0..k)
        .map(|id| {
            let [dx, dy] = DIRS[rng.gen_range(0..8)];
            let len = rng.gen_range(1..=(extent / 5).max(1));
            let span = |d: i32| if d < 0 { (len, extent) } else if d > 0 { (0, extent - len) } else { (0, extent) };
            let (x0, x1) = span(dx);
            let (y0, y1) = span(dy);
            let (x, y) = (rng.gen_range(x0..x1), rng.gen_range(y0..y1));
            let points = (0..=len).map(|t| [x + dx * t, y + dy * t]).collect();
            LineSegment::new(id, points).expect("straight runs are valid")
        })
        .collect();
    build_instance(segments, Point::default(), 30.0).expect("ids are consecutive")
}

/// Traced segment files of five generated sketches (`sketch(i, 320, 2)`
/// for i = 1..=5, default contour and trace settings), about 73 segments
/// each. Regenerate with the `make_suite` example.
const SUITE: [(&str, &str); 5] = [
    ("sketch1", include_str!("../data/sketch1.json")),
    ("sketch2", include_str!("../data/sketch2.json")),
    ("sketch3", include_str!("../data/sketch3.json")),
    ("sketch4", include_str!("../data/sketch4.json")),
    ("sketch5", include_str!("../data/sketch5.json")),
];

/// The bundled benchmark instances with the given home and lift cost.
pub fn bundled_suite(home: Point, cost_lift: f64) -> Vec<(String, GtspInstance)> {
    SUITE
        .iter()
        .map(|(name, text)| {
            let file: SegmentFile = serde_json::from_str(text).expect("bundled suite parses");
            let inst = build_instance(file.segments, home, cost_lift).expect("bundled suite is valid");
            (name.to_string(), inst)
        })
        .collect()
}

/// White canvas with dark strokes of a fixed radius.
struct Canvas {
    img: GrayImage,
    radius: f64,
}

impl Canvas {
    fn new(width: usize, height: usize, radius: f64) -> Self {
        Self {
            img: GrayImage::filled(width, height, 1.0),
            radius,
        }
    }

    fn dot(&mut self, cx: f64, cy: f64) {
        let r = self.radius;
        let (w, h) = (self.img.width() as f64, self.img.height() as f64);
        let x0 = (cx - r).floor().max(0.0) as usize;
        let y0 = (cy - r).floor().max(0.0) as usize;
        let x1 = (cx + r).ceil().min(w - 1.0).max(0.0) as usize;
        let y1 = (cy + r).ceil().min(h - 1.0).max(0.0) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.img.set(x, y, 0.0);
                }
            }
        }
    }

    fn polyline(&mut self, pts: &[(f64, f64)]) {
        for w in pts.windows(2) {
            let ((ax, ay), (bx, by)) = (w[0], w[1]);
            let steps = ((bx - ax).hypot(by - ay) * 4.0).ceil().max(1.0) as usize;
            for s in 0..=steps {
                let t = s as f64 / steps as f64;
                self.dot(ax + (bx - ax) * t, ay + (by - ay) * t);
            }
        }
    }

    /// Elliptical arc from angle `a0` to `a1` (radians, y down).
    fn arc(&mut self, cx: f64, cy: f64, rx: f64, ry: f64, a0: f64, a1: f64) {
        let n = ((a1 - a0).abs() * rx.max(ry)).ceil().max(2.0) as usize;
        let pts: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let a = a0 + (a1 - a0) * i as f64 / n as f64;
                (cx + rx * a.cos(), cy + ry * a.sin())
            })
            .collect();
        self.polyline(&pts);
    }
}

/// Draws one cartoon face inside the box at `(ox, oy)` of size `size`.
fn face(c: &mut Canvas, rng: &mut ChaCha8Rng, ox: f64, oy: f64, size: f64) {
    let j = |rng: &mut ChaCha8Rng, v: f64| rng.gen_range(-v..=v);
    let cx = ox + size * 0.5 + j(rng, size * 0.04);
    let cy = oy + size * 0.55 + j(rng, size * 0.04);
    let rx = size * rng.gen_range(0.27..0.32);
    let ry = size * rng.gen_range(0.33..0.38);

    // Head outline, left open under the hair line.
    c.arc(cx, cy, rx, ry, -0.15 * PI, 1.15 * PI);
    // Ears overlap the outline, which creates junctions.
    for side in [-1.0, 1.0] {
        let ex = cx + side * rx * 0.97;
        let a0 = if side < 0.0 { 0.5 * PI } else { -0.5 * PI };
        c.arc(ex, cy, rx * 0.18, ry * 0.2, a0, a0 + PI);
    }
    // Hair: a cap over the head plus a few strands.
    c.arc(cx, cy - ry * 0.1, rx * 1.08, ry * 1.0, PI * 1.05, PI * 1.95);
    let strands = rng.gen_range(2..=5);
    for s in 0..strands {
        let a = PI * (1.15 + 0.7 * (s as f64 + 0.5) / strands as f64);
        let (sx, sy) = (cx + rx * 1.08 * a.cos(), cy - ry * 0.1 + ry * a.sin());
        let len = size * rng.gen_range(0.1..0.18);
        let bend = j(rng, 0.5);
        c.polyline(&[
            (sx, sy),
            (sx + len * (a + bend).cos() * 0.6, sy + len * 0.5),
            (sx + len * a.cos() * 0.3 + j(rng, 3.0), sy + len),
        ]);
    }
    // Eyes with brows.
    let eye_dy = cy - ry * 0.15;
    for side in [-1.0, 1.0] {
        let ex = cx + side * rx * 0.42;
        c.arc(ex, eye_dy, rx * 0.22, ry * 0.11, 0.0, 2.0 * PI);
        let brow_lift = ry * rng.gen_range(0.14..0.2);
        c.arc(ex, eye_dy - brow_lift + ry * 0.1, rx * 0.2, ry * 0.1, 1.15 * PI, 1.85 * PI);
    }
    // Nose.
    let nx = cx + j(rng, rx * 0.05);
    c.polyline(&[
        (nx, cy - ry * 0.05),
        (nx - rx * 0.12, cy + ry * 0.22),
        (nx + rx * 0.05, cy + ry * 0.26),
    ]);
    // Mouth, and a chin line meeting the outline.
    let smile = rng.gen_range(0.18..0.3);
    c.arc(cx, cy + ry * 0.35, rx * 0.38, ry * smile, 0.15 * PI, 0.85 * PI);
    c.polyline(&[(cx - rx * 0.5, cy + ry * 0.55), (cx, cy + ry * 1.0)]);
    // Neck and collar below the chin.
    let bottom = (oy + size - 2.0).min(cy + ry * 1.45);
    for side in [-1.0, 1.0] {
        c.polyline(&[(cx + side * rx * 0.35, cy + ry * 0.93), (cx + side * rx * 0.38, bottom)]);
    }
    c.polyline(&[(cx - rx * 0.9, bottom), (cx, cy + ry * 1.2), (cx + rx * 0.9, bottom)]);
}

/// A `size`×`size` drawing with a `grid`×`grid` arrangement of faces.
pub fn sketch(seed: u64, size: usize, grid: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Canvas::new(size, size, 1.0);
    let cell = size as f64 / grid as f64;
    for gy in 0..grid {
        for gx in 0..grid {
            face(&mut c, &mut rng, gx as f64 * cell, gy as f64 * cell, cell);
        }
    }
    c.img
}
