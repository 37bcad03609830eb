//! The drawing-order problem as a generalized TSP.
//!
//! Each traced segment forms a node set of two directed nodes (drawn
//! forward or reversed). A tour picks one node per set. Its cost is
//!
//! ```text
//! v = n_lift * cost_lift + d(home, first) + d(last, home) + sum d(i, i+1)
//! ```
//!
//! where `d(i, i+1)` runs from the end of one drawn segment to the start of
//! the next. The two home travels always lift the pen; an inter-segment
//! travel lifts it only when its length is non-zero.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::LineSegment;

#[derive(Debug, Error, PartialEq)]
pub enum GtspError {
    #[error("instance needs at least one segment")]
    NoSegments,
    #[error("segment ids must be 0..{expected}; found {found}")]
    BadIds { expected: usize, found: usize },
    #[error("duplicate segment id {0}")]
    DuplicateId(usize),
    #[error("invalid segment: {0}")]
    BadSegment(String),
    #[error("cost_lift must be finite and non-negative, got {0}")]
    BadLiftCost(f64),
    #[error("key {key} at index {index} is outside [0, 2)")]
    KeyOutOfRange { index: usize, key: f64 },
    #[error("path is not a permutation of {0} segments")]
    InvalidPath(usize),
    #[error("chromosome has {got} keys, instance has {expected} segments")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[i32; 2]> for Point {
    fn from(p: [i32; 2]) -> Self {
        Self::new(f64::from(p[0]), f64::from(p[1]))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// Parses `"x,y"`.
impl FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got '{s}'"))?;
        let coord = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|c| c.is_finite())
                .ok_or_else(|| format!("bad coordinate '{v}' in '{s}'"))
        };
        Ok(Point::new(coord(x)?, coord(y)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Reverse,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Forward => Direction::Reverse,
            Direction::Reverse => Direction::Forward,
        }
    }

    /// Integer part of a random key: 1 forward, 0 reverse.
    pub fn bit(self) -> u8 {
        match self {
            Direction::Forward => 1,
            Direction::Reverse => 0,
        }
    }
}

/// One way of drawing a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedNode {
    pub segment_id: usize,
    pub direction: Direction,
    pub start: Point,
    pub end: Point,
}

/// Segments, home position and per-lift cost.
#[derive(Debug, Clone, PartialEq)]
pub struct GtspInstance {
    segments: Vec<LineSegment>,
    home: Point,
    cost_lift: f64,
    /// `[first, last]` point of each segment.
    ends: Vec<[Point; 2]>,
}

/// Validates the segments and builds an instance with `2K` implicit nodes.
pub fn build_instance(
    segments: Vec<LineSegment>,
    home: Point,
    cost_lift: f64,
) -> Result<GtspInstance, GtspError> {
    if segments.is_empty() {
        return Err(GtspError::NoSegments);
    }
    if !(cost_lift.is_finite() && cost_lift >= 0.0) {
        return Err(GtspError::BadLiftCost(cost_lift));
    }
    let k = segments.len();
    let mut seen = HashSet::with_capacity(k);
    for s in &segments {
        if !seen.insert(s.id) {
            return Err(GtspError::DuplicateId(s.id));
        }
        if s.id >= k {
            return Err(GtspError::BadIds {
                expected: k,
                found: s.id,
            });
        }
        s.validate().map_err(|e| GtspError::BadSegment(e.to_string()))?;
    }
    let mut segments = segments;
    segments.sort_by_key(|s| s.id);
    let ends = segments
        .iter()
        .map(|s| [Point::from(s.first()), Point::from(s.last())])
        .collect();
    Ok(GtspInstance {
        segments,
        home,
        cost_lift,
        ends,
    })
}

impl GtspInstance {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[LineSegment] {
        &self.segments
    }

    pub fn home(&self) -> Point {
        self.home
    }

    pub fn cost_lift(&self) -> f64 {
        self.cost_lift
    }

    pub fn node_count(&self) -> usize {
        2 * self.segments.len()
    }

    pub fn node(&self, segment_id: usize, direction: Direction) -> DirectedNode {
        DirectedNode {
            segment_id,
            direction,
            start: self.start(segment_id, direction),
            end: self.end(segment_id, direction),
        }
    }

    #[inline]
    pub fn start(&self, segment_id: usize, direction: Direction) -> Point {
        let [first, last] = self.ends[segment_id];
        match direction {
            Direction::Forward => first,
            Direction::Reverse => last,
        }
    }

    #[inline]
    pub fn end(&self, segment_id: usize, direction: Direction) -> Point {
        let [first, last] = self.ends[segment_id];
        match direction {
            Direction::Forward => last,
            Direction::Reverse => first,
        }
    }

    /// Cost of the travel between two consecutive segments: distance plus
    /// one lift unless the endpoints coincide.
    #[inline]
    pub fn link_cost(&self, from: (usize, Direction), to: (usize, Direction)) -> f64 {
        let d = self.end(from.0, from.1).distance(self.start(to.0, to.1));
        if d > 0.0 {
            d + self.cost_lift
        } else {
            0.0
        }
    }

    /// Travel from home to the start of `to`, excluding its (constant) lift.
    #[inline]
    pub fn from_home(&self, to: (usize, Direction)) -> f64 {
        self.home.distance(self.start(to.0, to.1))
    }

    /// Travel from the end of `from` back to home, excluding its lift.
    #[inline]
    pub fn to_home(&self, from: (usize, Direction)) -> f64 {
        self.end(from.0, from.1).distance(self.home)
    }
}

/// Random keys, one per segment, each in `[0, 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub keys: Vec<f64>,
}

/// Largest `f64` strictly below `v` for positive `v`.
fn below(v: f64) -> f64 {
    f64::from_bits(v.to_bits() - 1)
}

/// Builds a key from a direction bit and a fraction in `[0, 1)`, keeping
/// the sum below `bit + 1` despite rounding.
pub fn compose_key(bit: u8, fraction: f64) -> f64 {
    let base = f64::from(bit);
    let key = base + fraction.clamp(0.0, 1.0);
    if key >= base + 1.0 {
        below(base + 1.0)
    } else {
        key
    }
}

impl Chromosome {
    pub fn new(keys: Vec<f64>) -> Result<Self, GtspError> {
        let c = Self { keys };
        c.validate()?;
        Ok(c)
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn validate(&self) -> Result<(), GtspError> {
        for (index, &key) in self.keys.iter().enumerate() {
            if !(0.0..2.0).contains(&key) {
                return Err(GtspError::KeyOutOfRange { index, key });
            }
        }
        Ok(())
    }

    pub fn bit(&self, i: usize) -> u8 {
        if self.keys[i] >= 1.0 {
            1
        } else {
            0
        }
    }

    pub fn fraction(&self, i: usize) -> f64 {
        let k = self.keys[i];
        k - k.floor()
    }
}

/// Ordered `(segment_id, direction)` pairs; a permutation of all segments.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DrawingPath {
    pub tour: Vec<(usize, Direction)>,
}

impl DrawingPath {
    pub fn new(tour: Vec<(usize, Direction)>) -> Self {
        Self { tour }
    }

    pub fn len(&self) -> usize {
        self.tour.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tour.is_empty()
    }

    /// True when every segment `0..k` appears exactly once.
    pub fn is_valid_for(&self, k: usize) -> bool {
        if self.tour.len() != k {
            return false;
        }
        let mut seen = vec![false; k];
        for &(id, _) in &self.tour {
            if id >= k || seen[id] {
                return false;
            }
            seen[id] = true;
        }
        true
    }

    /// Same drawing traversed backwards: order reversed, every direction
    /// flipped.
    pub fn reversed(&self) -> Self {
        Self {
            tour: self.tour.iter().rev().map(|&(id, d)| (id, d.flipped())).collect(),
        }
    }
}

/// Sorts segments by the fractional part of their key (ties by id); the
/// integer part picks the direction.
pub fn decode(c: &Chromosome) -> Result<DrawingPath, GtspError> {
    c.validate()?;
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&a, &b| c.fraction(a).total_cmp(&c.fraction(b)).then(a.cmp(&b)));
    Ok(DrawingPath {
        tour: order
            .into_iter()
            .map(|i| {
                let dir = if c.bit(i) == 1 {
                    Direction::Forward
                } else {
                    Direction::Reverse
                };
                (i, dir)
            })
            .collect(),
    })
}

/// Inverse of [`decode`]: the segment at position `j` of `K` gets key
/// `bit + (j + 0.5) / (K + 1)`.
pub fn encode(p: &DrawingPath) -> Chromosome {
    let k = p.tour.len();
    let mut keys = vec![0.0; k];
    for (j, &(id, dir)) in p.tour.iter().enumerate() {
        keys[id] = compose_key(dir.bit(), (j as f64 + 0.5) / (k as f64 + 1.0));
    }
    Chromosome { keys }
}

/// Cost breakdown of one drawing path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub v_fitness: f64,
    pub n_lift: usize,
    pub lift_cost: f64,
    pub d_home_first: f64,
    pub d_last_home: f64,
    pub d_inter: Vec<f64>,
}

/// `v_fitness` of a valid path, summed in the same order as [`evaluate`]
/// so both agree bit for bit.
pub fn fitness(inst: &GtspInstance, tour: &[(usize, Direction)]) -> f64 {
    let mut lifts = 2usize;
    let mut travel = 0.0;
    for w in tour.windows(2) {
        let d = inst.end(w[0].0, w[0].1).distance(inst.start(w[1].0, w[1].1));
        if d > 0.0 {
            lifts += 1;
        }
        travel += d;
    }
    let lift_cost = lifts as f64 * inst.cost_lift;
    lift_cost + inst.from_home(tour[0]) + inst.to_home(tour[tour.len() - 1]) + travel
}

/// Full fitness evaluation with every term reported.
pub fn evaluate(inst: &GtspInstance, p: &DrawingPath) -> Result<FitnessReport, GtspError> {
    if !p.is_valid_for(inst.len()) {
        return Err(GtspError::InvalidPath(inst.len()));
    }
    let d_inter: Vec<f64> = p
        .tour
        .windows(2)
        .map(|w| inst.end(w[0].0, w[0].1).distance(inst.start(w[1].0, w[1].1)))
        .collect();
    let n_lift = 2 + d_inter.iter().filter(|&&d| d > 0.0).count();
    let lift_cost = n_lift as f64 * inst.cost_lift;
    let d_home_first = inst.from_home(p.tour[0]);
    let d_last_home = inst.to_home(p.tour[p.tour.len() - 1]);
    let v_fitness = fitness(inst, &p.tour);
    Ok(FitnessReport {
        v_fitness,
        n_lift,
        lift_cost,
        d_home_first,
        d_last_home,
        d_inter,
    })
}
