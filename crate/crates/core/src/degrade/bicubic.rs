//! Separable bicubic resampling (cubic convolution, `a = -0.5`).
//!
//! Pixel centers are aligned: output sample `o` sits at input coordinate
//! `(o + 0.5) / scale - 0.5`. When shrinking, the kernel is stretched by
//! `1 / scale` so it also acts as an anti-aliasing filter. Taps falling
//! outside the image are clamped to the nearest edge sample.

use crate::error::{Error, Result};
use crate::tensor::Image;

const A: f64 = -0.5;

/// Keys' cubic convolution kernel.
pub fn cubic(x: f64) -> f64 {
    let x = x.abs();
    if x <= 1.0 {
        (A + 2.0) * x * x * x - (A + 3.0) * x * x + 1.0
    } else if x < 2.0 {
        A * x * x * x - 5.0 * A * x * x + 8.0 * A * x - 4.0 * A
    } else {
        0.0
    }
}

/// Normalized taps `(index, weight)` for each output sample along one axis.
struct AxisWeights {
    taps: Vec<Vec<(usize, f64)>>,
}

impl AxisWeights {
    fn new(in_len: usize, out_len: usize, scale: f64) -> Self {
        // Stretch factor for anti-aliasing when shrinking.
        let stretch = if scale < 1.0 { scale } else { 1.0 };
        let support = 2.0 / stretch;
        let last = in_len as isize - 1;
        let taps = (0..out_len)
            .map(|o| {
                let u = (o as f64 + 0.5) / scale - 0.5;
                let lo = (u - support).floor() as isize;
                let hi = (u + support).ceil() as isize;
                let mut row: Vec<(usize, f64)> = (lo..=hi)
                    .filter_map(|x| {
                        let w = stretch * cubic(stretch * (x as f64 - u));
                        (w != 0.0).then(|| (x.clamp(0, last) as usize, w))
                    })
                    .collect();
                let sum: f64 = row.iter().map(|t| t.1).sum();
                row.iter_mut().for_each(|t| t.1 /= sum);
                row
            })
            .collect();
        Self { taps }
    }
}

/// Output length for a given scale; errors when it would be empty.
pub fn resized_len(len: usize, scale: f64) -> Result<usize> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid(format!("resize scale must be positive, got {scale}")));
    }
    let out = (len as f64 * scale).round();
    if out < 1.0 {
        return Err(Error::invalid(format!(
            "resizing length {len} by {scale} leaves no pixels"
        )));
    }
    Ok(out as usize)
}

/// Resizes every channel by `scale`; output dims are `round(dim * scale)`.
pub fn bicubic_resize(img: &Image, scale: f64) -> Result<Image> {
    let (_, h, w) = img.shape();
    let (oh, ow) = (resized_len(h, scale)?, resized_len(w, scale)?);
    let rows = AxisWeights::new(h, oh, scale);
    let cols = AxisWeights::new(w, ow, scale);
    img.map_planes(oh, ow, |p| {
        // Horizontal pass: h x ow.
        let mut tmp = vec![0.0; h * ow];
        for i in 0..h {
            let src = &p[i * w..(i + 1) * w];
            for (j, taps) in cols.taps.iter().enumerate() {
                tmp[i * ow + j] = taps.iter().map(|&(x, wt)| wt * src[x]).sum();
            }
        }
        let mut out = vec![0.0; oh * ow];
        for (i, taps) in rows.taps.iter().enumerate() {
            for &(y, wt) in taps {
                let src = &tmp[y * ow..(y + 1) * ow];
                for (o, v) in out[i * ow..(i + 1) * ow].iter_mut().zip(src) {
                    *o += wt * v;
                }
            }
        }
        out
    })
}

/// Taps of the blur kernel `k` for which `(x ⊗ k)↓s` reproduces
/// `bicubic_resize(x, 1/s)` away from the image border.
///
/// Returns an `n`-square tap array (center at index `n/2`) in the layout
/// expected by [`crate::freq::psf2otf_taps`]. The support covers the
/// widened cubic plus the `(s-1)/2` sub-pixel shift. Taps can be negative.
pub fn bicubic_equivalent_taps(s: usize) -> (usize, Vec<f64>) {
    let half = 2 * s + s / 2;
    let n = 2 * half + 1;
    let c = half as f64;
    let shift = (s as f64 - 1.0) / 2.0;
    let inv = 1.0 / s as f64;
    let mut line: Vec<f64> = (0..n)
        .map(|t| inv * cubic(inv * (c - t as f64 - shift)))
        .collect();
    let sum: f64 = line.iter().sum();
    line.iter_mut().for_each(|v| *v /= sum);
    let taps = (0..n * n).map(|k| line[k / n] * line[k % n]).collect();
    (n, taps)
}
