//! Raster loading, saving and binarization.
//!
//! Intensities are normalized to `[0, 1]` with `0.0` black. Ink is dark.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use thiserror::Error;

/// Rec. 709 luminance weights.
const LUMA_R: f64 = 0.2126;
const LUMA_G: f64 = 0.7152;
const LUMA_B: f64 = 0.0722;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot read image {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot write image {path}: {source}")]
    Write {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("image {0} has a zero dimension")]
    Empty(String),
    #[error("pixel buffer holds {got} values, expected {expected}")]
    BadLength { expected: usize, got: usize },
    #[error("intensity {0} outside [0, 1]")]
    OutOfRange(f64),
}

/// Row-major grayscale raster with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, ImageError> {
        if data.len() != width * height {
            return Err(ImageError::BadLength {
                expected: width * height,
                got: data.len(),
            });
        }
        if let Some(&v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ImageError::OutOfRange(v));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Image filled with a single intensity (clamped to `[0, 1]`).
    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value.clamp(0.0, 1.0); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Sets a pixel, clamping the value into `[0, 1]`.
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value.clamp(0.0, 1.0);
    }

    /// Intensity with coordinates clamped to the image border.
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.get(cx, cy)
    }

    /// Bilinear sample at a real-valued position, clamped to the border.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (xi, yi) = (x0 as isize, y0 as isize);
        let a = self.get_clamped(xi, yi);
        let b = self.get_clamped(xi + 1, yi);
        let c = self.get_clamped(xi, yi + 1);
        let d = self.get_clamped(xi + 1, yi + 1);
        let top = a + (b - a) * fx;
        let bottom = c + (d - c) * fx;
        top + (bottom - top) * fy
    }
}

/// Row-major ink mask (`true` = ink).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    ink: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, ink: Vec<bool>) -> Result<Self, ImageError> {
        if ink.len() != width * height {
            return Err(ImageError::BadLength {
                expected: width * height,
                got: ink.len(),
            });
        }
        Ok(Self { width, height, ink })
    }

    pub fn blank(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            ink: vec![false; width * height],
        }
    }

    /// Builds a mask from ASCII art: `#` (or `1`) is ink, anything else blank.
    /// Rows must have equal length.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut ink = Vec::with_capacity(width * height);
        for row in rows {
            assert_eq!(row.chars().count(), width, "ragged ascii bitmap");
            ink.extend(row.chars().map(|c| c == '#' || c == '1'));
        }
        Self { width, height, ink }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn ink(&self) -> &[bool] {
        &self.ink
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.ink[y * self.width + x]
    }

    /// Out-of-bounds coordinates read as blank.
    pub fn get_signed(&self, x: isize, y: isize) -> bool {
        self.in_bounds(x, y) && self.ink[y as usize * self.width + x as usize]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.ink[y * self.width + x] = value;
    }

    pub fn in_bounds(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn count_ink(&self) -> usize {
        self.ink.iter().filter(|&&b| b).count()
    }

    /// Ink pixel coordinates in raster order (by `y`, then `x`).
    pub fn ink_pixels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.ink
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i % self.width, i / self.width))
    }

    /// Ink as `0.0`, blank as `1.0`.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.ink.iter().map(|&b| if b { 0.0 } else { 1.0 }).collect(),
        }
    }
}

/// Loads a PNG or PGM (or any format the `image` crate was built with) as
/// normalized grayscale. Color is reduced by Rec. 709 luminance; alpha is
/// composited over white.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage, ImageError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let dynamic = image::ImageReader::open(path)
        .map_err(|e| ImageError::Read {
            path: shown.clone(),
            source: image::ImageError::IoError(e),
        })?
        .with_guessed_format()
        .map_err(|e| ImageError::Read {
            path: shown.clone(),
            source: image::ImageError::IoError(e),
        })?
        .decode()
        .map_err(|source| ImageError::Read {
            path: shown.clone(),
            source,
        })?;
    from_dynamic(&dynamic).ok_or(ImageError::Empty(shown))
}

fn from_dynamic(dynamic: &DynamicImage) -> Option<GrayImage> {
    let (width, height) = (dynamic.width() as usize, dynamic.height() as usize);
    if width == 0 || height == 0 {
        return None;
    }
    let rgba = dynamic.to_rgba16();
    let data = rgba
        .pixels()
        .map(|p| {
            let [r, g, b, a] = p.0.map(|c| f64::from(c) / 65535.0);
            let luma = LUMA_R * r + LUMA_G * g + LUMA_B * b;
            (a * luma + (1.0 - a)).clamp(0.0, 1.0)
        })
        .collect();
    Some(GrayImage {
        width,
        height,
        data,
    })
}

/// Writes an 8-bit grayscale image; the format follows the file extension.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<(), ImageError> {
    let path = path.as_ref();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> = ImageBuffer::from_fn(
        img.width as u32,
        img.height as u32,
        |x, y| Luma([(img.get(x as usize, y as usize) * 255.0).round() as u8]),
    );
    buf.save(path).map_err(|source| ImageError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// `ink(p) = img(p) < threshold`.
pub fn binarize(img: &GrayImage, threshold: f64) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        ink: img.data.iter().map(|&v| v < threshold).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Rgb, RgbImage};
    use proptest::prelude::*;

    fn write_rgb(dir: &tempfile::TempDir, name: &str, px: [u8; 3]) -> std::path::PathBuf {
        let path = dir.path().join(name);
        RgbImage::from_pixel(1, 1, Rgb(px)).save(&path).unwrap();
        path
    }

    #[test]
    fn white_and_black_pixels() {
        let dir = tempfile::tempdir().unwrap();
        let white = load_gray(write_rgb(&dir, "w.png", [255, 255, 255])).unwrap();
        assert_eq!((white.width(), white.height()), (1, 1));
        assert_eq!(white.data(), &[1.0]);
        let black = load_gray(write_rgb(&dir, "b.png", [0, 0, 0])).unwrap();
        assert_eq!(black.data(), &[0.0]);
    }

    #[test]
    fn red_uses_luminance_weight() {
        let dir = tempfile::tempdir().unwrap();
        let red = load_gray(write_rgb(&dir, "r.png", [255, 0, 0])).unwrap();
        assert!((red.get(0, 0) - 0.2126).abs() < 1e-3);
    }

    #[test]
    fn reads_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        std::fs::write(&path, b"P2\n2 1\n255\n0 255\n").unwrap();
        let img = load_gray(&path).unwrap();
        assert_eq!(img.data(), &[0.0, 1.0]);
    }

    #[test]
    fn missing_and_garbage_files_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(load_gray(dir.path().join("nope.png")).is_err());
        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"not an image").unwrap();
        assert!(matches!(load_gray(&junk), Err(ImageError::Read { .. })));
    }

    #[test]
    fn binarize_boundaries() {
        let white = GrayImage::filled(3, 2, 1.0);
        assert_eq!(binarize(&white, 0.5).count_ink(), 0);
        let black = GrayImage::filled(3, 2, 0.0);
        assert_eq!(binarize(&black, 0.5).count_ink(), 6);
        let half = GrayImage::filled(1, 1, 0.5);
        assert!(!binarize(&half, 0.5).get(0, 0));
    }

    #[test]
    fn constructor_checks() {
        assert!(GrayImage::new(2, 2, vec![0.0; 3]).is_err());
        assert!(GrayImage::new(1, 1, vec![1.5]).is_err());
        assert!(BinaryImage::new(2, 1, vec![true]).is_err());
    }

    #[test]
    fn bilinear_midpoint() {
        let img = GrayImage::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert!((img.sample_bilinear(0.5, 0.0) - 0.5).abs() < 1e-12);
        assert_eq!(img.sample_bilinear(-3.0, 0.0), 0.0);
    }

    proptest! {
        #[test]
        fn binarize_idempotent(values in prop::collection::vec(0.0f64..=1.0, 12), t in 1e-9f64..=1.0) {
            let img = GrayImage::new(4, 3, values).unwrap();
            let once = binarize(&img, t);
            let twice = binarize(&once.to_gray(), t);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn save_load_round_trip(values in prop::collection::vec(0.0f64..=1.0, 20)) {
            let dir = tempfile::tempdir().unwrap();
            let img = GrayImage::new(5, 4, values).unwrap();
            for name in ["a.png", "a.pgm"] {
                let path = dir.path().join(name);
                save_gray(&img, &path).unwrap();
                let back = load_gray(&path).unwrap();
                for (a, b) in img.data().iter().zip(back.data()) {
                    prop_assert!((a - b).abs() <= 1.0 / 255.0);
                }
            }
        }
    }
}
