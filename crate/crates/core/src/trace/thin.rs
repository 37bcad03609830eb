//! Hit-or-miss thinning.
//!
//! Every 3x3 neighbourhood is looked up in one of two 256-entry tables
//! (the two Lam-Lee-Suen subiterations, as in MATLAB's `bwmorph thin`).
//! Each subiteration deletes all matched pixels at once; the pair repeats
//! until the image stops changing. Two clean-up passes follow: staircase
//! corners that are simple points are removed so every traced arc is a
//! simple 8-path, and a pixel with all four axis neighbours inked (the
//! centre of a one-pixel cross) is opened so the result is thin.

use crate::image_io::BinaryImage;

use super::{axis_neighbors, ink_neighbors};

/// Neighbour order x1..x8: E, NE, N, NW, W, SW, S, SE.
const RING: [(isize, isize); 8] = [(1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1)];

/// Neighbourhood code: bit `i` is set when neighbour `x(i+1)` is ink.
fn code(img: &BinaryImage, x: usize, y: usize) -> u8 {
    RING.iter().enumerate().fold(0, |acc, (i, &(dx, dy))| {
        acc | (u8::from(img.get_signed(x as isize + dx, y as isize + dy)) << i)
    })
}

/// Deletion tables for the two subiterations, indexed by [`code`].
fn thinning_tables() -> [[bool; 256]; 2] {
    let mut tables = [[false; 256]; 2];
    let [first, second] = &mut tables;
    for (c, (a, b)) in first.iter_mut().zip(second.iter_mut()).enumerate() {
        let x = |i: usize| (c >> ((i - 1) % 8)) & 1 == 1;
        // Exactly one 8-connected run of ink around the pixel.
        let crossings = (1..=4).filter(|&i| !x(2 * i - 1) && (x(2 * i) || x(2 * i + 1))).count();
        let n1 = (1..=4).filter(|&k| x(2 * k - 1) || x(2 * k)).count();
        let n2 = (1..=4).filter(|&k| x(2 * k) || x(2 * k + 1)).count();
        let keeps_shape = crossings == 1 && (2..=3).contains(&n1.min(n2));
        *a = keeps_shape && !((x(2) || x(3) || !x(8)) && x(1));
        *b = keeps_shape && !((x(6) || x(7) || !x(4)) && x(5));
    }
    tables
}

/// Yokoi connectivity number for 8-connected foreground. A pixel is
/// simple (deletable without changing topology) when this equals 1.
pub(crate) fn yokoi8(img: &BinaryImage, x: usize, y: usize) -> u32 {
    let bg: Vec<u32> = RING
        .iter()
        .map(|&(dx, dy)| u32::from(!img.get_signed(x as isize + dx, y as isize + dy)))
        .collect();
    (0..4)
        .map(|i| {
            let k = 2 * i;
            bg[k] - bg[k] * bg[(k + 1) % 8] * bg[(k + 2) % 8]
        })
        .sum()
}

/// Morphological thinning to a one-pixel-wide, 8-connected skeleton.
pub fn skeletonize(img: &BinaryImage) -> BinaryImage {
    let tables = thinning_tables();
    let mut out = img.clone();
    loop {
        let mut changed = false;
        for table in &tables {
            let hits: Vec<(usize, usize)> = out
                .ink_pixels()
                .filter(|&(x, y)| table[code(&out, x, y) as usize])
                .collect();
            changed |= !hits.is_empty();
            for (x, y) in hits {
                out.set(x, y, false);
            }
        }
        if !changed {
            break;
        }
    }
    open_crosses(&mut out);
    remove_corners(&mut out);
    out
}

/// Deletes pixels whose four axis neighbours are all ink. The four
/// neighbours stay mutually 8-connected, so connectivity is kept.
fn open_crosses(img: &mut BinaryImage) {
    let centres: Vec<(usize, usize)> = img
        .ink_pixels()
        .filter(|&(x, y)| axis_neighbors(img, x, y) == 4)
        .collect();
    for (x, y) in centres {
        if axis_neighbors(img, x, y) == 4 {
            img.set(x, y, false);
        }
    }
}

/// Removes simple pixels sitting in a staircase corner, i.e. with two
/// perpendicular axis neighbours inked, until none remain.
fn remove_corners(img: &mut BinaryImage) {
    loop {
        let mut changed = false;
        let pixels: Vec<(usize, usize)> = img.ink_pixels().collect();
        for (x, y) in pixels {
            if is_redundant_corner(img, x, y) {
                img.set(x, y, false);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

fn is_redundant_corner(img: &BinaryImage, x: usize, y: usize) -> bool {
    let (xi, yi) = (x as isize, y as isize);
    let n = img.get_signed(xi, yi - 1);
    let e = img.get_signed(xi + 1, yi);
    let s = img.get_signed(xi, yi + 1);
    let w = img.get_signed(xi - 1, yi);
    let perpendicular = (n || s) && (e || w);
    perpendicular && ink_neighbors(img, x, y) >= 2 && yokoi8(img, x, y) == 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_never_delete_ends_or_interiors() {
        let tables = thinning_tables();
        for table in &tables {
            // isolated pixel, line end, full interior
            for c in [0u8, 0b0000_0001, 0b0000_0100, 0xff] {
                assert!(!table[c as usize], "{c:08b}");
            }
        }
        // Only the first subiteration deletes a south-east boundary pixel.
        let se_edge = 0b0011_1100; // N, NW, W, SW inked
        assert!(tables[0][se_edge] && !tables[1][se_edge]);
    }

    #[test]
    fn thin_line_is_fixed_point() {
        let img = BinaryImage::from_ascii(&[".......", ".#####.", "......."]);
        assert_eq!(skeletonize(&img), img);
    }

    #[test]
    fn yokoi_cases() {
        let corner = BinaryImage::from_ascii(&["...", "##.", ".#."]);
        assert_eq!(yokoi8(&corner, 1, 1), 1);
        let line = BinaryImage::from_ascii(&["...", "###", "..."]);
        assert_eq!(yokoi8(&line, 1, 1), 2);
        let interior = BinaryImage::from_ascii(&[".#.", "###", ".#."]);
        assert_eq!(yokoi8(&interior, 1, 1), 0);
    }

    #[test]
    fn staircase_loses_corners_only() {
        let img = BinaryImage::from_ascii(&[
            "#.....", //
            "##....", //
            ".##...", //
            "..##..", //
            "...#..",
        ]);
        let out = skeletonize(&img);
        assert!(out.count_ink() >= 5);
        for (x, y) in out.ink_pixels() {
            assert!(!is_redundant_corner(&out, x, y));
        }
        // both ends survive
        assert!(out.get(0, 0));
        assert!(out.get(3, 4));
    }
}
