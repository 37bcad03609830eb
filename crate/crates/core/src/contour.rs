//! Coherent line extraction: Edge Tangent Flow followed by flow-based
//! Difference-of-Gaussians filtering.
//!
//! The ETF is a smoothed field of unit tangents that follow the dominant
//! edge direction. FDoG evaluates a 1D DoG across each tangent and then
//! averages those responses along the flow, so coherent strokes reinforce
//! each other while isolated specks fade out.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image_io::{binarize, BinaryImage, GrayImage};

#[derive(Debug, Error, PartialEq)]
pub enum ContourError {
    #[error("image is {image_w}x{image_h} but flow field is {field_w}x{field_h}")]
    DimensionMismatch {
        image_w: usize,
        image_h: usize,
        field_w: usize,
        field_h: usize,
    },
    #[error("invalid FDoG parameter: {0}")]
    InvalidParams(String),
    #[error("image is empty")]
    EmptyImage,
}

/// FDoG and ETF settings. Lengths are in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdogParams {
    /// Center Gaussian of the cross-flow DoG.
    pub sigma_c: f64,
    /// Surround sigma as a multiple of `sigma_c`.
    pub rho: f64,
    /// Gaussian weight along the flow.
    pub sigma_m: f64,
    /// Streamline half-length.
    pub line_length: usize,
    /// Output threshold: pixels below it are ink.
    pub tau: f64,
    pub etf_radius: usize,
    pub etf_iterations: usize,
}

impl Default for FdogParams {
    fn default() -> Self {
        Self {
            sigma_c: 1.0,
            rho: 1.6,
            sigma_m: 3.0,
            line_length: 8,
            tau: 0.3,
            etf_radius: 5,
            etf_iterations: 3,
        }
    }
}

impl FdogParams {
    pub fn validate(&self) -> Result<(), ContourError> {
        let bad = |msg: &str| Err(ContourError::InvalidParams(msg.to_string()));
        if !(self.sigma_c > 0.0 && self.sigma_c.is_finite()) {
            return bad("sigma_c must be > 0");
        }
        if !(self.sigma_m > 0.0 && self.sigma_m.is_finite()) {
            return bad("sigma_m must be > 0");
        }
        if !(self.rho > 1.0 && self.rho.is_finite()) {
            return bad("rho must be > 1");
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return bad("tau must lie in [0, 1]");
        }
        if self.etf_iterations < 1 {
            return bad("etf_iterations must be >= 1");
        }
        Ok(())
    }
}

/// Row-major field of unit tangents; `(0, 0)` where no direction exists.
#[derive(Debug, Clone, PartialEq)]
pub struct EtfField {
    width: usize,
    height: usize,
    vectors: Vec<[f64; 2]>,
}

impl EtfField {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vectors(&self) -> &[[f64; 2]] {
        &self.vectors
    }

    pub fn get(&self, x: usize, y: usize) -> [f64; 2] {
        self.vectors[y * self.width + x]
    }
}

fn is_zero(v: [f64; 2]) -> bool {
    v[0] == 0.0 && v[1] == 0.0
}

fn normalized(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    if n > 1e-12 {
        [v[0] / n, v[1] / n]
    } else {
        [0.0, 0.0]
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Sobel gradient with clamp-to-edge borders.
fn sobel(img: &GrayImage) -> Vec<[f64; 2]> {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut out = Vec::with_capacity((w * h) as usize);
    for y in 0..h {
        for x in 0..w {
            let p = |dx: isize, dy: isize| img.get_clamped(x + dx, y + dy);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            out.push([gx, gy]);
        }
    }
    out
}

/// Builds the edge tangent flow.
///
/// Tangents start as the Sobel gradient rotated by 90 degrees and are then
/// smoothed `etf_iterations` times over a disc of radius `etf_radius`.
/// Each neighbor is weighted by the magnitude difference
/// `(1 + tanh(g(y) - g(x))) / 2` and by the signed alignment `t(x) . t(y)`.
/// Pixels whose own tangent is zero (the center of a 1-px line has no
/// gradient) take the dominant orientation of their neighbors instead: the
/// principal axis of the weighted sum of `t t^T`, which ignores signs.
pub fn compute_etf(img: &GrayImage, params: &FdogParams) -> Result<EtfField, ContourError> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    if w == 0 || h == 0 {
        return Err(ContourError::EmptyImage);
    }
    let grad = sobel(img);
    let mags: Vec<f64> = grad.iter().map(|g| g[0].hypot(g[1])).collect();
    let max_mag = mags.iter().cloned().fold(0.0, f64::max);
    let gnorm: Vec<f64> = if max_mag > 0.0 {
        mags.iter().map(|m| m / max_mag).collect()
    } else {
        vec![0.0; mags.len()]
    };
    let mut tangents: Vec<[f64; 2]> = grad
        .iter()
        .zip(&mags)
        .map(|(g, &m)| if m > 0.0 { [-g[1] / m, g[0] / m] } else { [0.0, 0.0] })
        .collect();

    let r = params.etf_radius as isize;
    let offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect();

    for _ in 0..params.etf_iterations {
        let mut next = vec![[0.0, 0.0]; tangents.len()];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let idx = y as usize * w + x as usize;
                let tx = tangents[idx];
                let gx = gnorm[idx];
                let mut acc = [0.0, 0.0];
                // Orientation tensor for pixels without a tangent of their own.
                let mut tensor = [0.0, 0.0, 0.0];
                for &(dx, dy) in &offsets {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let nidx = ny as usize * w + nx as usize;
                    let ty = tangents[nidx];
                    if is_zero(ty) {
                        continue;
                    }
                    let wm = 0.5 * (1.0 + (gnorm[nidx] - gx).tanh());
                    if is_zero(tx) {
                        tensor[0] += wm * ty[0] * ty[0];
                        tensor[1] += wm * ty[0] * ty[1];
                        tensor[2] += wm * ty[1] * ty[1];
                    } else {
                        let weight = dot(tx, ty) * wm;
                        acc[0] += weight * ty[0];
                        acc[1] += weight * ty[1];
                    }
                }
                if is_zero(tx) && tensor != [0.0, 0.0, 0.0] {
                    let angle = 0.5 * (2.0 * tensor[1]).atan2(tensor[0] - tensor[2]);
                    acc = [angle.cos(), angle.sin()];
                }
                next[idx] = normalized(acc);
            }
        }
        tangents = next;
    }

    Ok(EtfField {
        width: w,
        height: h,
        vectors: tangents,
    })
}

fn gaussian_taps(sigma: f64, half: usize) -> Vec<f64> {
    let raw: Vec<f64> = (-(half as isize)..=half as isize)
        .map(|s| (-((s * s) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// Cross-flow DoG kernel: normalized center Gaussian minus normalized
/// surround Gaussian, sampled at integer offsets `-half..=half`.
pub fn dog_kernel(params: &FdogParams) -> Vec<f64> {
    let half = (3.0 * params.rho * params.sigma_c).ceil() as usize;
    let center = gaussian_taps(params.sigma_c, half);
    let surround = gaussian_taps(params.rho * params.sigma_c, half);
    center.iter().zip(&surround).map(|(c, s)| c - s).collect()
}

/// Maps an accumulated DoG response to `[0, 1]`: `0` is a strong dark line,
/// `1` is no line. Responses are scaled by the kernel's center tap, which
/// is the response to a single full-contrast dark pixel.
pub fn response_to_intensity(h: f64, center_tap: f64) -> f64 {
    if h < 0.0 {
        (1.0 + (h / center_tap).tanh()).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Flow-based DoG. Returns an intensity image where dark pixels are line
/// responses; binarize with `params.tau`.
pub fn fdog(img: &GrayImage, etf: &EtfField, params: &FdogParams) -> Result<GrayImage, ContourError> {
    params.validate()?;
    let (w, h) = (img.width(), img.height());
    if etf.width != w || etf.height != h {
        return Err(ContourError::DimensionMismatch {
            image_w: w,
            image_h: h,
            field_w: etf.width,
            field_h: etf.height,
        });
    }
    let kernel = dog_kernel(params);
    let half = (kernel.len() / 2) as isize;
    let center_tap = kernel[half as usize];

    // Cross-flow response at every pixel.
    let mut cross = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let t = etf.get(x, y);
            if is_zero(t) {
                continue;
            }
            let n = [t[1], -t[0]];
            let mut sum = 0.0;
            for (i, k) in kernel.iter().enumerate() {
                let s = (i as isize - half) as f64;
                sum += k * img.sample_bilinear(x as f64 + s * n[0], y as f64 + s * n[1]);
            }
            cross[y * w + x] = sum;
        }
    }

    let along: Vec<f64> = (0..=params.line_length)
        .map(|k| (-((k * k) as f64) / (2.0 * params.sigma_m * params.sigma_m)).exp())
        .collect();

    let mut data = vec![1.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let t = etf.get(x, y);
            if is_zero(t) {
                continue;
            }
            let mut sum = along[0] * cross[y * w + x];
            let mut weight = along[0];
            for sign in [1.0, -1.0] {
                let mut dir = [t[0] * sign, t[1] * sign];
                let mut pos = [x as f64, y as f64];
                for &wk in &along[1..] {
                    pos = [pos[0] + dir[0], pos[1] + dir[1]];
                    let (qx, qy) = (pos[0].round(), pos[1].round());
                    if qx < 0.0 || qy < 0.0 || qx >= w as f64 || qy >= h as f64 {
                        break;
                    }
                    let qi = qy as usize * w + qx as usize;
                    let mut v = etf.vectors[qi];
                    if is_zero(v) {
                        break;
                    }
                    if dot(v, dir) < 0.0 {
                        v = [-v[0], -v[1]];
                    }
                    sum += wk * cross[qi];
                    weight += wk;
                    dir = v;
                }
            }
            data[y * w + x] = response_to_intensity(sum / weight, center_tap);
        }
    }
    Ok(GrayImage::new(w, h, data).expect("fdog output stays in [0, 1]"))
}

/// ETF, FDoG and thresholding at `params.tau` in one call.
pub fn extract_contours(img: &GrayImage, params: &FdogParams) -> Result<BinaryImage, ContourError> {
    let etf = compute_etf(img, params)?;
    let response = fdog(img, &etf, params)?;
    Ok(binarize(&response, params.tau))
}
