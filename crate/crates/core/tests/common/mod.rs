//! Shared helpers for the integration tests: seeded random inputs, fixture
//! paths and dense reference operators built by explicit index arithmetic.

#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector};
use pnp_restore::degrade::BlurKernel;
use pnp_restore::tensor::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_image(rng: &mut ChaCha8Rng, c: usize, h: usize, w: usize) -> Image {
    let data = (0..c * h * w).map(|_| rng.random::<f64>()).collect();
    Image::new(c, h, w, data).unwrap()
}

pub fn random_kernel(rng: &mut ChaCha8Rng, kh: usize, kw: usize) -> BlurKernel {
    let taps = (0..kh * kw).map(|_| rng.random::<f64>() + 1e-3).collect();
    BlurKernel::normalized(kh, kw, taps).unwrap()
}

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture_image(name: &str) -> Image {
    pnp_restore::tensor::read_png(fixtures().join("images").join(name)).unwrap()
}

pub fn fixture_kernel(name: &str) -> BlurKernel {
    BlurKernel::load(fixtures().join("kernels").join(name)).unwrap()
}

pub fn to_vec(img: &Image) -> DVector<f64> {
    DVector::from_column_slice(img.data())
}

pub fn from_vec(v: &DVector<f64>, c: usize, h: usize, w: usize) -> Image {
    Image::new(c, h, w, v.as_slice().to_vec()).unwrap()
}

/// Circular convolution on an `h×w` plane as a dense matrix; kernel tap
/// `(a, b)` moves a sample by `(a − ⌊kh/2⌋, b − ⌊kw/2⌋)`.
pub fn dense_convolution(taps: &[f64], kh: usize, kw: usize, h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let mut m = DMatrix::zeros(n, n);
    let (ch, cw) = ((kh / 2) as isize, (kw / 2) as isize);
    for i in 0..h {
        for j in 0..w {
            for a in 0..kh {
                for b in 0..kw {
                    let si = (i as isize - a as isize + ch).rem_euclid(h as isize) as usize;
                    let sj = (j as isize - b as isize + cw).rem_euclid(w as isize) as usize;
                    m[(i * w + j, si * w + sj)] += taps[a * kw + b];
                }
            }
        }
    }
    m
}

pub fn dense_kernel(kernel: &BlurKernel, h: usize, w: usize) -> DMatrix<f64> {
    dense_convolution(kernel.weights(), kernel.height(), kernel.width(), h, w)
}

/// Keeps sample `(s·i, s·j)` of every s×s block.
pub fn dense_decimation(h: usize, w: usize, s: usize) -> DMatrix<f64> {
    let (oh, ow) = (h / s, w / s);
    let mut m = DMatrix::zeros(oh * ow, h * w);
    for i in 0..oh {
        for j in 0..ow {
            m[(i * ow + j, s * i * w + s * j)] = 1.0;
        }
    }
    m
}

/// Solves `(AᵀA + αI) x = Aᵀy + αz` directly.
pub fn dense_prox(a: &DMatrix<f64>, y: &DVector<f64>, z: &DVector<f64>, alpha: f64) -> DVector<f64> {
    let n = a.ncols();
    let lhs = a.transpose() * a + DMatrix::identity(n, n) * alpha;
    let rhs = a.transpose() * y + z * alpha;
    lhs.cholesky().expect("normal matrix is SPD").solve(&rhs)
}

/// Applies a dense per-plane operator to every channel.
pub fn apply_dense(m: &DMatrix<f64>, img: &Image, oh: usize, ow: usize) -> Image {
    let planes = (0..img.channels())
        .map(|c| (m * DVector::from_column_slice(img.plane(c))).as_slice().to_vec())
        .collect();
    Image::from_planes(oh, ow, planes).unwrap()
}

/// Forward differences with a zero difference past the last row/column,
/// stacked as [horizontal; vertical].
pub fn dense_gradient(h: usize, w: usize) -> DMatrix<f64> {
    let n = h * w;
    let mut d = DMatrix::zeros(2 * n, n);
    for i in 0..h {
        for j in 0..w {
            let k = i * w + j;
            if j + 1 < w {
                d[(k, k)] = -1.0;
                d[(k, k + 1)] = 1.0;
            }
            if i + 1 < h {
                d[(n + k, k)] = -1.0;
                d[(n + k, k + w)] = 1.0;
            }
        }
    }
    d
}

/// `argmin ½‖u − f‖² + weight·Σ|∇u|` via accelerated projected gradient on
/// the dual `min_{|p_k| ≤ 1} ½‖f − weight·Dᵀp‖²`.
pub fn tv_prox_dual_oracle(f: &[f64], h: usize, w: usize, weight: f64) -> Vec<f64> {
    let n = h * w;
    let d = dense_gradient(h, w);
    let fv = DVector::from_column_slice(f);
    let step = 1.0 / (8.0 * weight * weight);
    let project = |p: &mut DVector<f64>| {
        for k in 0..n {
            let m = (p[k] * p[k] + p[n + k] * p[n + k]).sqrt();
            if m > 1.0 {
                p[k] /= m;
                p[n + k] /= m;
            }
        }
    };
    let mut p = DVector::zeros(2 * n);
    let mut q = p.clone();
    let mut t: f64 = 1.0;
    for _ in 0..100_000 {
        let u = &fv - d.transpose() * &q * weight;
        let mut next = &q + (&d * u) * (weight * step);
        project(&mut next);
        let tn = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        q = &next + (&next - &p) * ((t - 1.0) / tn);
        p = next;
        t = tn;
    }
    (&fv - d.transpose() * p * weight).as_slice().to_vec()
}
