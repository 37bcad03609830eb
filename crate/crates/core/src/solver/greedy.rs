use crate::gtsp::{Direction, DrawingPath, GtspInstance};

/// Nearest-neighbour construction from home. At each step the unvisited
/// directed node whose start is closest to the pen wins; ties go to the
/// lower segment id, then to Forward.
pub fn greedy(inst: &GtspInstance) -> DrawingPath {
    let k = inst.len();
    let mut visited = vec![false; k];
    let mut pos = inst.home();
    let mut tour = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(f64, usize, Direction)> = None;
        for id in (0..k).filter(|&i| !visited[i]) {
            for dir in [Direction::Forward, Direction::Reverse] {
                let d = pos.distance(inst.start(id, dir));
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, id, dir));
                }
            }
        }
        let (_, id, dir) = best.expect("an unvisited segment remains");
        visited[id] = true;
        pos = inst.end(id, dir);
        tour.push((id, dir));
    }
    DrawingPath::new(tour)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gtsp::{build_instance, fitness, Point};
    use crate::trace::LineSegment;
    use Direction::{Forward as F, Reverse as R};

    fn line(id: usize, a: [i32; 2], b: [i32; 2]) -> LineSegment {
        let n = (b[0] - a[0]).abs().max((b[1] - a[1]).abs());
        let pts = (0..=n)
            .map(|t| [a[0] + (b[0] - a[0]) * t / n, a[1] + (b[1] - a[1]) * t / n])
            .collect();
        LineSegment::new(id, pts).unwrap()
    }

    #[test]
    fn two_segment_example() {
        let inst = build_instance(
            vec![line(0, [0, 0], [10, 0]), line(1, [10, 1], [20, 1])],
            Point::default(),
            30.0,
        )
        .unwrap();
        let p = greedy(&inst);
        assert_eq!(p.tour, vec![(0, F), (1, F)]);
        assert!((fitness(&inst, &p.tour) - (91.0 + 401f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn single_segment_from_its_start() {
        let inst = build_instance(vec![line(0, [3, 3], [8, 3])], Point::new(3.0, 3.0), 30.0).unwrap();
        assert_eq!(greedy(&inst).tour, vec![(0, F)]);
    }

    #[test]
    fn prefers_reverse_when_end_is_closer() {
        let inst = build_instance(vec![line(0, [9, 0], [1, 0])], Point::default(), 30.0).unwrap();
        assert_eq!(greedy(&inst).tour, vec![(0, R)]);
    }

    #[test]
    fn ties_go_to_lower_id_then_forward() {
        // Both segments start 5 px from home.
        let inst = build_instance(
            vec![line(0, [0, 5], [0, 9]), line(1, [5, 0], [9, 0])],
            Point::default(),
            30.0,
        )
        .unwrap();
        assert_eq!(greedy(&inst).tour[0], (0, F));
    }
}
