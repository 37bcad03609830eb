//! Spur pruning and line-end extension on thin skeletons.

use crate::image_io::BinaryImage;

use super::{axis_neighbors, crossing_number, walk_neighbors};

fn is_endpoint(img: &BinaryImage, p: (usize, usize)) -> bool {
    img.get(p.0, p.1) && crossing_number(img, p.0, p.1) == 1
}

fn is_junction(img: &BinaryImage, p: (usize, usize)) -> bool {
    crossing_number(img, p.0, p.1) >= 3
}

enum BranchEnd {
    /// Walk hit a junction; the branch excludes it.
    Junction,
    /// Walk ran out of pixels: the branch is a whole component.
    Open,
    /// Walk got longer than the caller cares about.
    TooLong,
}

/// Follows the curve from endpoint `start` for at most `limit` pixels.
fn walk_branch(img: &BinaryImage, start: (usize, usize), limit: usize) -> (Vec<(usize, usize)>, BranchEnd) {
    let mut branch = vec![start];
    let mut cur = start;
    loop {
        let next = walk_neighbors(img, cur, |q| !branch.contains(&q));
        if next.iter().any(|&q| is_junction(img, q)) {
            return (branch, BranchEnd::Junction);
        }
        let Some(&step) = next.first() else {
            return (branch, BranchEnd::Open);
        };
        // Several unconnected ways forward: this pixel acts as a junction.
        let spread = next.iter().any(|&q| q.0.abs_diff(step.0) > 1 || q.1.abs_diff(step.1) > 1);
        if spread {
            branch.pop();
            return (branch, BranchEnd::Junction);
        }
        if branch.len() >= limit {
            return (branch, BranchEnd::TooLong);
        }
        branch.push(step);
        cur = step;
    }
}

/// Removes branches that run from an endpoint to a junction in fewer than
/// `max_spur_px` pixels, one at a time, until none are left. A component
/// without junctions is never a spur.
pub fn prune(skel: &BinaryImage, params: &super::TraceParams) -> BinaryImage {
    let mut out = skel.clone();
    if params.max_spur_px == 0 {
        return out;
    }
    loop {
        let mut changed = false;
        let ends: Vec<(usize, usize)> = out.ink_pixels().filter(|&p| is_endpoint(&out, p)).collect();
        for end in ends {
            if !is_endpoint(&out, end) {
                continue;
            }
            let (branch, how) = walk_branch(&out, end, params.max_spur_px);
            if matches!(how, BranchEnd::Junction) && !branch.is_empty() && branch.len() < params.max_spur_px {
                for (x, y) in branch {
                    out.set(x, y, false);
                }
                changed = true;
            }
        }
        if !changed {
            return out;
        }
    }
}

/// Extends every endpoint along the direction from the pixel two steps
/// back towards it, by up to `max_extension_px` pixels. Extension stops at
/// the image border, on reaching existing ink, or where a new pixel would
/// leave some pixel with all four axis neighbours inked.
pub fn extend_line_ends(skel: &BinaryImage, params: &super::TraceParams) -> BinaryImage {
    let mut out = skel.clone();
    if params.max_extension_px == 0 {
        return out;
    }
    let ends: Vec<(usize, usize)> = skel.ink_pixels().filter(|&p| is_endpoint(skel, p)).collect();
    for end in ends {
        if !is_endpoint(&out, end) {
            continue;
        }
        let (tail, _) = walk_branch(&out, end, 3);
        if tail.len() < 2 {
            continue;
        }
        let back = tail[tail.len() - 1];
        let (dx, dy) = (end.0 as f64 - back.0 as f64, end.1 as f64 - back.1 as f64);
        let scale = dx.abs().max(dy.abs());
        let (ux, uy) = (dx / scale, dy / scale);
        let mut own: Vec<(usize, usize)> = tail.clone();
        for t in 1..=params.max_extension_px {
            let qx = end.0 as isize + (t as f64 * ux).round() as isize;
            let qy = end.1 as isize + (t as f64 * uy).round() as isize;
            if !out.in_bounds(qx, qy) || out.get_signed(qx, qy) {
                break;
            }
            let q = (qx as usize, qy as usize);
            out.set(q.0, q.1, true);
            let thick = std::iter::once(q)
                .chain(walk_neighbors(&out, q, |_| true))
                .any(|p| axis_neighbors(&out, p.0, p.1) == 4);
            if thick {
                out.set(q.0, q.1, false);
                break;
            }
            own.push(q);
            let met = !walk_neighbors(&out, q, |p| !own.contains(&p)).is_empty();
            if met {
                break;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::{components, detect_junctions, TraceParams};
    use super::*;

    fn params(spur: usize, ext: usize) -> TraceParams {
        TraceParams {
            min_component_px: 0,
            max_spur_px: spur,
            max_extension_px: ext,
        }
    }

    fn plus_with_spur() -> BinaryImage {
        BinaryImage::from_ascii(&[
            "...............", //
            ".......#.......", //
            ".......#.......", //
            ".......#.......", //
            ".......#.......", //
            ".......#.......", //
            ".......#.#.....", //
            ".......#.#.....", //
            ".#############.", //
            ".......#.......", //
            ".......#.......", //
            ".......#.......", //
            ".......#.......", //
            ".......#.......", //
            "...............",
        ])
    }

    #[test]
    fn spur_removed_plus_kept() {
        let img = plus_with_spur();
        let out = prune(&img, &params(4, 0));
        assert!(!out.get(9, 6) && !out.get(9, 7));
        assert_eq!(out.count_ink(), img.count_ink() - 2);
        assert_eq!(detect_junctions(&out).into_iter().collect::<Vec<_>>(), vec![(7, 8)]);
    }

    #[test]
    fn zero_spur_length_is_identity() {
        let img = plus_with_spur();
        assert_eq!(prune(&img, &params(0, 0)), img);
    }

    #[test]
    fn lone_segment_is_not_a_spur() {
        let img = BinaryImage::from_ascii(&[".....", ".###.", "....."]);
        assert_eq!(prune(&img, &params(10, 0)), img);
    }

    #[test]
    fn gap_between_collinear_segments_closes() {
        let img = BinaryImage::from_ascii(&[
            "....................", //
            "..######..######....", //
            "....................",
        ]);
        assert_eq!(components(&img).len(), 2);
        let out = extend_line_ends(&img, &params(0, 3));
        assert_eq!(components(&out).len(), 1);
    }

    #[test]
    fn zero_extension_is_identity() {
        let img = BinaryImage::from_ascii(&["......", ".####.", "......"]);
        assert_eq!(extend_line_ends(&img, &params(0, 0)), img);
    }

    #[test]
    fn extension_clipped_at_border() {
        let img = BinaryImage::from_ascii(&["####..", "......"]);
        let out = extend_line_ends(&img, &params(0, 3));
        // left end sits on the border; right end grows to the edge
        assert!(out.get(0, 0));
        assert!(out.get(4, 0) && out.get(5, 0));
        assert_eq!(out.count_ink(), 6);
    }

    #[test]
    fn diagonal_end_extends_diagonally() {
        let img = BinaryImage::from_ascii(&[
            "#.......", //
            ".#......", //
            "..#.....", //
            "........", //
            "........", //
            "........",
        ]);
        let out = extend_line_ends(&img, &params(0, 2));
        assert!(out.get(3, 3) && out.get(4, 4));
    }
}
