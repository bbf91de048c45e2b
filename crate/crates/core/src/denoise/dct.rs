//! Sliding-window DCT hard thresholding.

use crate::tensor::Image;

const PATCH: usize = 8;
const STRIDE: usize = 4;
const THRESHOLD_FACTOR: f64 = 3.0;

/// Orthonormal DCT-II matrix, `n x n`, row `u` holding basis function `u`.
fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for u in 0..n {
        let scale = if u == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for x in 0..n {
            m[u * n + x] = scale
                * (std::f64::consts::PI * (2 * x + 1) as f64 * u as f64 / (2 * n) as f64).cos();
        }
    }
    m
}

/// Patch origins along one axis: every `STRIDE`, plus one flush with the end.
fn origins(len: usize, patch: usize) -> Vec<usize> {
    let last = len - patch;
    let mut v: Vec<usize> = (0..=last).step_by(STRIDE).collect();
    if *v.last().unwrap() != last {
        v.push(last);
    }
    v
}

pub fn dct_denoise_plane(plane: &[f64], height: usize, width: usize, sigma: f64) -> Vec<f64> {
    let (ph, pw) = (PATCH.min(height), PATCH.min(width));
    let (ch, cw) = (dct_matrix(ph), dct_matrix(pw));
    let thr = THRESHOLD_FACTOR * sigma;

    let mut acc = vec![0.0; height * width];
    let mut hits = vec![0u32; height * width];
    let mut block = vec![0.0; ph * pw];
    let mut tmp = vec![0.0; ph * pw];

    for &oi in &origins(height, ph) {
        for &oj in &origins(width, pw) {
            for a in 0..ph {
                for b in 0..pw {
                    block[a * pw + b] = plane[(oi + a) * width + oj + b];
                }
            }
            // Forward: C_h · B · C_wᵀ
            for u in 0..ph {
                for b in 0..pw {
                    tmp[u * pw + b] = (0..ph).map(|a| ch[u * ph + a] * block[a * pw + b]).sum();
                }
            }
            for u in 0..ph {
                for v in 0..pw {
                    block[u * pw + v] = (0..pw).map(|b| tmp[u * pw + b] * cw[v * pw + b]).sum();
                }
            }
            for (k, c) in block.iter_mut().enumerate() {
                if k != 0 && c.abs() < thr {
                    *c = 0.0;
                }
            }
            // Inverse: C_hᵀ · B · C_w
            for a in 0..ph {
                for v in 0..pw {
                    tmp[a * pw + v] = (0..ph).map(|u| ch[u * ph + a] * block[u * pw + v]).sum();
                }
            }
            for a in 0..ph {
                for b in 0..pw {
                    let val: f64 = (0..pw).map(|v| tmp[a * pw + v] * cw[v * pw + b]).sum();
                    let k = (oi + a) * width + oj + b;
                    acc[k] += val;
                    hits[k] += 1;
                }
            }
        }
    }
    acc.iter().zip(&hits).map(|(a, &n)| a / n as f64).collect()
}

/// `sigma` is on the normalized `[0, 1]` scale.
pub fn dct_threshold_denoise(img: &Image, sigma: f64) -> Image {
    let (_, h, w) = img.shape();
    img.map_planes(h, w, |p| dct_denoise_plane(p, h, w, sigma))
        .expect("shape preserved")
}
