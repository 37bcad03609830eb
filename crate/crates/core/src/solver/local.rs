//! Local search over directed-segment tours: 2-opt, the direction DP and
//! a variable-depth Lin-Kernighan search.
//!
//! Tours are handled internally as node indices `2 * id + reversed`, so
//! flipping a node is `n ^ 1`. A lookup table holds every travel cost,
//! lifts included, with an extra index for home.

use crate::gtsp::{Direction, DrawingPath, GtspInstance};

/// Moves must gain more than this to count; guards against float cycling.
pub(crate) const EPS: f64 = 1e-9;

/// Depth and breadth limits of the Lin-Kernighan move chain.
pub const LK_DEPTH: usize = 5;
pub const LK_BREADTH: usize = 5;

pub(crate) fn node_of(id: usize, dir: Direction) -> usize {
    2 * id + usize::from(dir == Direction::Reverse)
}

pub(crate) fn pair_of(node: usize) -> (usize, Direction) {
    let dir = if node & 1 == 0 {
        Direction::Forward
    } else {
        Direction::Reverse
    };
    (node / 2, dir)
}

pub(crate) fn to_nodes(p: &DrawingPath) -> Vec<usize> {
    p.tour.iter().map(|&(id, d)| node_of(id, d)).collect()
}

pub(crate) fn to_path(nodes: &[usize]) -> DrawingPath {
    DrawingPath::new(nodes.iter().map(|&n| pair_of(n)).collect())
}

/// All pairwise travel costs of an instance. Index `2K` is home. Costs
/// from or to home exclude the two constant home lifts.
#[derive(Debug, Clone)]
pub struct CostTable {
    size: usize,
    home: usize,
    fixed: f64,
    cost: Vec<f64>,
}

impl CostTable {
    pub fn new(inst: &GtspInstance) -> Self {
        let k = inst.len();
        let size = 2 * k + 1;
        let home = 2 * k;
        let mut cost = vec![0.0; size * size];
        for a in 0..2 * k {
            let pa = pair_of(a);
            cost[home * size + a] = inst.from_home(pa);
            cost[a * size + home] = inst.to_home(pa);
            for b in 0..2 * k {
                if a / 2 != b / 2 {
                    cost[a * size + b] = inst.link_cost(pa, pair_of(b));
                }
            }
        }
        Self {
            size,
            home,
            fixed: 2.0 * inst.cost_lift(),
            cost,
        }
    }

    #[inline]
    pub fn link(&self, from: usize, to: usize) -> f64 {
        self.cost[from * self.size + to]
    }

    pub fn home(&self) -> usize {
        self.home
    }

    /// Tour cost from the table (same value as `evaluate` up to summation
    /// order).
    pub fn tour_cost(&self, tour: &[usize]) -> f64 {
        let mut total = self.fixed;
        let mut prev = self.home;
        for &n in tour {
            total += self.link(prev, n);
            prev = n;
        }
        total + self.link(prev, self.home)
    }

    #[inline]
    fn before(&self, tour: &[usize], i: usize) -> usize {
        if i == 0 {
            self.home
        } else {
            tour[i - 1]
        }
    }

    #[inline]
    fn after(&self, tour: &[usize], j: usize) -> usize {
        if j + 1 == tour.len() {
            self.home
        } else {
            tour[j + 1]
        }
    }

    /// Cost change of reversing `tour[i..=j]` and flipping every node in it.
    /// Links inside the span keep their length (travel is symmetric), so
    /// only the two boundary links change.
    #[inline]
    pub fn reversal_delta(&self, tour: &[usize], i: usize, j: usize) -> f64 {
        let prev = self.before(tour, i);
        let next = self.after(tour, j);
        self.link(prev, tour[j] ^ 1) + self.link(tour[i] ^ 1, next) - self.link(prev, tour[i]) - self.link(tour[j], next)
    }
}

pub(crate) fn reverse_span(tour: &mut [usize], i: usize, j: usize) {
    tour[i..=j].reverse();
    for n in &mut tour[i..=j] {
        *n ^= 1;
    }
}

/// 2-opt to local optimality. Each sweep walks the first index `i` and
/// applies the best improving partner `j >= i`; `i == j` flips a single
/// segment. Sweeps repeat until one finds nothing.
pub(crate) fn two_opt_nodes(table: &CostTable, tour: &mut [usize]) -> bool {
    let k = tour.len();
    let mut any = false;
    loop {
        let mut improved = false;
        for i in 0..k {
            let mut best = -EPS;
            let mut best_j = None;
            for j in i..k {
                let d = table.reversal_delta(tour, i, j);
                if d < best {
                    best = d;
                    best_j = Some(j);
                }
            }
            if let Some(j) = best_j {
                reverse_span(tour, i, j);
                improved = true;
            }
        }
        if !improved {
            return any;
        }
        any = true;
    }
}

/// True when no reversal or single flip improves the tour.
#[cfg(test)]
fn is_two_opt_local(table: &CostTable, tour: &[usize]) -> bool {
    let k = tour.len();
    (0..k).all(|i| (i..k).all(|j| table.reversal_delta(tour, i, j) >= -EPS))
}

/// Best-improvement 2-opt on a drawing path; the result never costs more.
pub fn two_opt(inst: &GtspInstance, p: &DrawingPath) -> DrawingPath {
    let table = CostTable::new(inst);
    let mut nodes = to_nodes(p);
    two_opt_nodes(&table, &mut nodes);
    to_path(&nodes)
}

/// Picks the best direction of every segment for a fixed visiting order
/// with a forward dynamic program over `(position, direction)`. Returns
/// true if the tour got cheaper.
pub(crate) fn optimize_directions(table: &CostTable, tour: &mut [usize]) -> bool {
    let k = tour.len();
    if k == 0 {
        return false;
    }
    let home = table.home();
    let base = |pos: usize| tour[pos] & !1;
    // best[pos][bit]: cheapest cost up to and including node base+bit at pos.
    let mut best = vec![[0.0f64; 2]; k];
    let mut from = vec![[0u8; 2]; k];
    for (bit, b) in best[0].iter_mut().enumerate() {
        *b = table.link(home, base(0) | bit);
    }
    for pos in 1..k {
        for bit in 0..2 {
            let node = base(pos) | bit;
            // Prefer the predecessor's current direction on ties.
            let keep = (tour[pos - 1] & 1) as u8;
            let order = [keep, 1 - keep];
            let mut choice = order[0];
            let mut value = best[pos - 1][choice as usize] + table.link(base(pos - 1) | choice as usize, node);
            let other = order[1];
            let alt = best[pos - 1][other as usize] + table.link(base(pos - 1) | other as usize, node);
            if alt < value {
                value = alt;
                choice = other;
            }
            best[pos][bit] = value;
            from[pos][bit] = choice;
        }
    }
    let finish = |bit: usize| best[k - 1][bit] + table.link(base(k - 1) | bit, home);
    let keep = tour[k - 1] & 1;
    let mut last = keep;
    if finish(1 - keep) < finish(keep) {
        last = 1 - keep;
    }
    let mut dirs = vec![0usize; k];
    dirs[k - 1] = last;
    for pos in (1..k).rev() {
        dirs[pos - 1] = from[pos][dirs[pos]] as usize;
    }
    let candidate: Vec<usize> = (0..k).map(|p| base(p) | dirs[p]).collect();
    if table.tour_cost(&candidate) < table.tour_cost(tour) - EPS {
        tour.copy_from_slice(&candidate);
        true
    } else {
        false
    }
}

/// Candidates kept per level of the move chain: wide at the top, a single
/// greedy continuation further down.
const LK_LEVEL_BREADTH: [usize; LK_DEPTH] = [LK_BREADTH, 3, 1, 1, 1];

/// Segment id of a node, with home as its own key.
fn set_of(table: &CostTable, n: usize) -> usize {
    if n == table.home() {
        usize::MAX
    } else {
        n / 2
    }
}

struct Chain<'a> {
    table: &'a CostTable,
    /// Fixed end `t1` sits just before position `a`; `tour[a]` is the free
    /// end and the link between them is the one that closes the tour.
    a: usize,
    start_cost: f64,
    best: Option<(f64, Vec<usize>)>,
    /// Links added by the chain, as unordered set pairs; they are never
    /// removed again.
    added: Vec<(usize, usize)>,
}

impl Chain<'_> {
    fn is_added(&self, x: usize, y: usize) -> bool {
        self.added.iter().any(|&(p, q)| (p, q) == (x, y) || (p, q) == (y, x))
    }

    /// Extends the chain from `tour` (cost `cost`, cumulative gain `gain`).
    /// Returns true once an improving tour has been recorded.
    fn search(&mut self, tour: &mut [usize], cost: f64, gain: f64, depth: usize) -> bool {
        let t = self.table;
        let k = tour.len();
        let a = self.a;
        let free = tour[a] ^ 1;
        // Adding link free -> t3 and dropping tour[j] -> t3 turns the tour
        // into the one obtained by reversing tour[a..=j].
        let mut cands: Vec<(usize, f64, f64)> = (a..k)
            .filter_map(|j| {
                let t3 = t.after(tour, j);
                let add = t.link(free, t3);
                let removed = t.link(tour[j], t3);
                let keep = gain - add > EPS && !self.is_added(set_of(t, tour[j]), set_of(t, t3));
                keep.then_some((j, add, removed))
            })
            .collect();
        cands.sort_by(|x, y| (y.2 - y.1).total_cmp(&(x.2 - x.1)).then(x.0.cmp(&y.0)));
        cands.truncate(LK_LEVEL_BREADTH[depth]);

        for (j, add, removed) in cands {
            let t3 = t.after(tour, j);
            let pair = (set_of(t, tour[a]), set_of(t, t3));
            let next_cost = cost + t.reversal_delta(tour, a, j);
            reverse_span(tour, a, j);
            let bar = self.best.as_ref().map_or(self.start_cost, |b| b.0);
            if next_cost < bar - EPS {
                self.best = Some((next_cost, tour.to_vec()));
            }
            let mut done = self.best.is_some();
            if depth + 1 < LK_DEPTH {
                self.added.push(pair);
                done |= self.search(tour, next_cost, gain - add + removed, depth + 1);
                self.added.pop();
            }
            reverse_span(tour, a, j);
            if done {
                return true;
            }
        }
        false
    }
}

/// Runs one move chain for every anchor position; returns true if the
/// tour improved.
fn lk_pass(table: &CostTable, tour: &mut Vec<usize>) -> bool {
    let mut improved = false;
    for a in 0..tour.len() {
        let cost = table.tour_cost(tour);
        let mut chain = Chain {
            table,
            a,
            start_cost: cost,
            best: None,
            added: Vec::with_capacity(LK_DEPTH),
        };
        let gain = table.link(table.before(tour, a), tour[a]);
        let mut work = tour.clone();
        chain.search(&mut work, cost, gain, 0);
        if let Some((_, better)) = chain.best {
            *tour = better;
            optimize_directions(table, tour);
            improved = true;
        }
    }
    improved
}

/// Lin-Kernighan style improvement, starting from the 2-opt optimum of the
/// input. Each pass runs move chains from every position, once on the
/// tour and once on its mirror image so both neighbours of every link get
/// to act as the fixed end. Accepted chains are followed by the direction
/// DP. Passes alternate with 2-opt until neither finds anything, so the
/// result is 2-opt-local as well.
pub(crate) fn lin_kernighan_nodes(table: &CostTable, tour: &mut Vec<usize>) {
    two_opt_nodes(table, tour);
    optimize_directions(table, tour);
    if tour.is_empty() {
        return;
    }
    let last = tour.len() - 1;
    loop {
        let mut improved = lk_pass(table, tour);
        reverse_span(tour, 0, last);
        improved |= lk_pass(table, tour);
        reverse_span(tour, 0, last);
        let polished = two_opt_nodes(table, tour);
        if !improved && !polished {
            break;
        }
    }
}

pub fn lin_kernighan(inst: &GtspInstance, p: &DrawingPath) -> DrawingPath {
    let table = CostTable::new(inst);
    let mut nodes = to_nodes(p);
    lin_kernighan_nodes(&table, &mut nodes);
    to_path(&nodes)
}
