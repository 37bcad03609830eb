//! Binary contours to ordered pixel polylines.
//!
//! Stages: [`clean`] -> [`skeletonize`] -> [`prune`] -> [`extend_line_ends`]
//! -> [`split_and_trace`]. All stages use 8-connectivity.

mod prune;
mod thin;

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image_io::BinaryImage;

pub use prune::{extend_line_ends, prune};
pub use thin::skeletonize;

/// Neighbour offsets in circular order, clockwise from north.
pub(crate) const NEIGHBORS8: [(isize, isize); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Visit order when walking a curve: axis steps before diagonal ones.
const WALK_ORDER: [(isize, isize); 8] = [
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, 0),
    (1, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
];

pub(crate) fn ink_neighbors(img: &BinaryImage, x: usize, y: usize) -> usize {
    NEIGHBORS8
        .iter()
        .filter(|&&(dx, dy)| img.get_signed(x as isize + dx, y as isize + dy))
        .count()
}

pub(crate) fn axis_neighbors(img: &BinaryImage, x: usize, y: usize) -> usize {
    [(0, -1), (1, 0), (0, 1), (-1, 0)]
        .iter()
        .filter(|&&(dx, dy)| img.get_signed(x as isize + dx, y as isize + dy))
        .count()
}

/// Number of blank -> ink transitions walking the 8-neighbourhood once
/// around.
pub fn crossing_number(img: &BinaryImage, x: usize, y: usize) -> usize {
    let ring = NEIGHBORS8.map(|(dx, dy)| img.get_signed(x as isize + dx, y as isize + dy));
    (0..8).filter(|&i| !ring[i] && ring[(i + 1) % 8]).count()
}

pub type Pixel = [i32; 2];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SegmentError {
    #[error("segment {0} has fewer than two points")]
    TooShort(usize),
    #[error("segment {id}: points {a:?} and {b:?} are not 8-adjacent and distinct")]
    NotAdjacent { id: usize, a: Pixel, b: Pixel },
    #[error("segment {id}: point {p:?} is visited twice")]
    Repeated { id: usize, p: Pixel },
}

/// An ordered, 8-connected pixel path. Closed loops repeat their first
/// point as the last one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LineSegment {
    pub id: usize,
    pub points: Vec<Pixel>,
}

impl LineSegment {
    pub fn new(id: usize, points: Vec<Pixel>) -> Result<Self, SegmentError> {
        let seg = Self { id, points };
        seg.validate()?;
        Ok(seg)
    }

    pub fn first(&self) -> Pixel {
        self.points[0]
    }

    pub fn last(&self) -> Pixel {
        self.points[self.points.len() - 1]
    }

    pub fn is_closed(&self) -> bool {
        self.points.len() > 3 && self.first() == self.last()
    }

    pub fn validate(&self) -> Result<(), SegmentError> {
        if self.points.len() < 2 {
            return Err(SegmentError::TooShort(self.id));
        }
        for pair in self.points.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (dx, dy) = ((a[0] - b[0]).abs(), (a[1] - b[1]).abs());
            if dx > 1 || dy > 1 || (dx == 0 && dy == 0) {
                return Err(SegmentError::NotAdjacent { id: self.id, a, b });
            }
        }
        let body = if self.is_closed() {
            &self.points[..self.points.len() - 1]
        } else {
            &self.points[..]
        };
        let mut seen = HashSet::with_capacity(body.len());
        for p in body {
            if !seen.insert(*p) {
                return Err(SegmentError::Repeated { id: self.id, p: *p });
            }
        }
        Ok(())
    }
}

/// Cleanup, pruning and extension limits, in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceParams {
    pub min_component_px: usize,
    pub max_spur_px: usize,
    pub max_extension_px: usize,
}

impl Default for TraceParams {
    fn default() -> Self {
        Self {
            min_component_px: 8,
            max_spur_px: 5,
            max_extension_px: 3,
        }
    }
}

/// 8-connected ink components, each listed in raster order; components
/// are ordered by their first pixel.
pub fn components(img: &BinaryImage) -> Vec<Vec<(usize, usize)>> {
    components_by(img, |_, _| true)
}

/// Components where two ink neighbours only connect if `link` allows it.
fn components_by(img: &BinaryImage, link: impl Fn((usize, usize), (usize, usize)) -> bool) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (img.width(), img.height());
    let mut label = vec![false; w * h];
    let mut out = Vec::new();
    for (x, y) in img.ink_pixels() {
        if label[y * w + x] {
            continue;
        }
        label[y * w + x] = true;
        let mut stack = vec![(x, y)];
        let mut comp = Vec::new();
        while let Some((cx, cy)) = stack.pop() {
            comp.push((cx, cy));
            for (dx, dy) in NEIGHBORS8 {
                let (nx, ny) = (cx as isize + dx, cy as isize + dy);
                if img.get_signed(nx, ny) && link((cx, cy), (nx as usize, ny as usize)) {
                    let i = ny as usize * w + nx as usize;
                    if !label[i] {
                        label[i] = true;
                        stack.push((nx as usize, ny as usize));
                    }
                }
            }
        }
        comp.sort_by_key(|&(x, y)| (y, x));
        out.push(comp);
    }
    out
}

/// Drops 8-connected components smaller than `min_component_px` pixels.
pub fn clean(img: &BinaryImage, params: &TraceParams) -> BinaryImage {
    let mut out = img.clone();
    for comp in components(img) {
        if comp.len() < params.min_component_px {
            for (x, y) in comp {
                out.set(x, y, false);
            }
        }
    }
    out
}

/// Ink pixels with crossing number of at least 3.
pub fn detect_junctions(skel: &BinaryImage) -> BTreeSet<(usize, usize)> {
    skel.ink_pixels()
        .filter(|&(x, y)| crossing_number(skel, x, y) >= 3)
        .collect()
}

fn px(p: (usize, usize)) -> Pixel {
    [p.0 as i32, p.1 as i32]
}

fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a != b && a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

fn is_axis_step(a: (usize, usize), b: (usize, usize)) -> bool {
    a.0.abs_diff(b.0) + a.1.abs_diff(b.1) == 1
}

/// Neighbours of `p` that satisfy `keep`, axis steps first.
fn walk_neighbors(
    img: &BinaryImage,
    p: (usize, usize),
    keep: impl Fn((usize, usize)) -> bool,
) -> Vec<(usize, usize)> {
    WALK_ORDER
        .iter()
        .filter_map(|&(dx, dy)| {
            let (nx, ny) = (p.0 as isize + dx, p.1 as isize + dy);
            img.get_signed(nx, ny).then_some((nx as usize, ny as usize))
        })
        .filter(|&q| keep(q))
        .collect()
}

/// Splits the skeleton at junction pixels and traces every arc.
///
/// Junctions are duplicated onto the ends of the arcs that touch them, two
/// adjacent junctions are joined by a two-point segment, and arcs without
/// any end (isolated loops) start at their lowest `(y, x)` pixel and repeat
/// it at the end. Isolated single pixels cannot form a segment and are
/// dropped. The result is sorted by first point `(y, x)` and numbered from 0.
pub fn split_and_trace(skel: &BinaryImage) -> Vec<LineSegment> {
    let junctions = detect_junctions(skel);
    let is_junction = |p: (usize, usize)| junctions.contains(&p);

    let mut arcs = skel.clone();
    for &(x, y) in &junctions {
        arcs.set(x, y, false);
    }
    // Two arms leaving a junction sideways touch diagonally once the
    // junction is gone; that contact is not part of either arc.
    let linked = |p: (usize, usize), q: (usize, usize)| {
        is_axis_step(p, q) || !(is_junction((p.0, q.1)) || is_junction((q.0, p.1)))
    };

    let mut paths: Vec<Vec<Pixel>> = Vec::new();
    let mut covered: HashSet<(usize, usize)> = HashSet::new();

    for comp in components_by(&arcs, linked) {
        let members: HashSet<(usize, usize)> = comp.iter().copied().collect();
        let mut visited: HashSet<(usize, usize)> = HashSet::with_capacity(comp.len());
        let degree = |p: (usize, usize)| walk_neighbors(&arcs, p, |q| members.contains(&q) && linked(p, q)).len();
        let all_degree_two = comp.iter().all(|&p| degree(p) == 2);

        while visited.len() < comp.len() {
            // Prefer an unvisited end (fewest unvisited neighbours), raster order.
            let start = *comp
                .iter()
                .filter(|p| !visited.contains(*p))
                .min_by_key(|&&p| {
                    let free = walk_neighbors(&arcs, p, |q| members.contains(&q) && !visited.contains(&q) && linked(p, q)).len();
                    (free, p.1, p.0)
                })
                .expect("unvisited pixel exists");
            let mut path = vec![start];
            visited.insert(start);
            let mut cur = start;
            while let Some(&next) =
                walk_neighbors(&arcs, cur, |q| members.contains(&q) && !visited.contains(&q) && linked(cur, q)).first()
            {
                visited.insert(next);
                path.push(next);
                cur = next;
            }

            let closed =
                all_degree_two && path.len() == comp.len() && path.len() >= 3 && adjacent(cur, start) && linked(cur, start);
            let mut pts: Vec<(usize, usize)> = path.clone();
            if closed {
                pts.push(start);
            } else {
                let head_j = junction_near(skel, pts[0], &is_junction, None);
                let tail_j = junction_near(skel, *pts.last().unwrap(), &is_junction, if pts.len() == 1 { head_j } else { None });
                if let Some(j) = head_j {
                    pts.insert(0, j);
                }
                if let Some(j) = tail_j {
                    if pts.len() >= 3 || pts[0] != j {
                        pts.push(j);
                    }
                }
                if pts.len() == 1 {
                    // Leftover pixel of a non-thin blob: hook it onto a traced neighbour.
                    match walk_neighbors(skel, pts[0], |q| visited.contains(&q) && q != pts[0]).first() {
                        Some(&v) => pts.insert(0, v),
                        None => continue,
                    }
                }
            }
            covered.extend(pts.iter().copied());
            paths.push(pts.into_iter().map(px).collect());
        }
    }

    // Junction-to-junction links.
    for &a in &junctions {
        for &b in junctions.range(a..).skip(1) {
            if adjacent(a, b) {
                covered.insert(a);
                covered.insert(b);
                paths.push(vec![px(a), px(b)]);
            }
        }
    }
    // A junction touched only by arc interiors still has to be drawn.
    for &j in &junctions {
        if !covered.contains(&j) {
            if let Some(&n) = walk_neighbors(skel, j, |_| true).first() {
                paths.push(vec![px(j), px(n)]);
            }
        }
    }

    paths.sort_by(|a, b| {
        let ka: Vec<(i32, i32)> = a.iter().map(|p| (p[1], p[0])).collect();
        let kb: Vec<(i32, i32)> = b.iter().map(|p| (p[1], p[0])).collect();
        ka.cmp(&kb)
    });
    paths
        .into_iter()
        .enumerate()
        .map(|(id, points)| LineSegment { id, points })
        .collect()
}

/// Adjacent junction for an arc end, axis neighbours first.
fn junction_near(
    skel: &BinaryImage,
    p: (usize, usize),
    is_junction: &impl Fn((usize, usize)) -> bool,
    exclude: Option<(usize, usize)>,
) -> Option<(usize, usize)> {
    let found = walk_neighbors(skel, p, |q| is_junction(q) && Some(q) != exclude);
    found
        .iter()
        .copied()
        .find(|&q| is_axis_step(p, q))
        .or_else(|| found.first().copied())
}

/// Intermediate masks and the final segments of [`trace_segments`].
#[derive(Debug, Clone)]
pub struct TraceStages {
    pub cleaned: BinaryImage,
    pub skeleton: BinaryImage,
    pub pruned: BinaryImage,
    pub extended: BinaryImage,
    pub segments: Vec<LineSegment>,
}

/// Runs every trace stage on a binary contour image.
pub fn trace_stages(img: &BinaryImage, params: &TraceParams) -> TraceStages {
    let cleaned = clean(img, params);
    let skeleton = skeletonize(&cleaned);
    let pruned = prune(&skeleton, params);
    let extended = extend_line_ends(&pruned, params);
    let segments = split_and_trace(&extended);
    TraceStages {
        cleaned,
        skeleton,
        pruned,
        extended,
        segments,
    }
}

pub fn trace_segments(img: &BinaryImage, params: &TraceParams) -> Vec<LineSegment> {
    trace_stages(img, params).segments
}
