//! Blur kernels and their text file format.
//!
//! File format (UTF-8): a first line `kh kw`, followed by `kh` lines holding
//! `kw` whitespace-separated decimal taps each.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const LOAD_SUM_TOLERANCE: f64 = 1e-3;

/// Small nonnegative convolution kernel whose taps sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct BlurKernel {
    height: usize,
    width: usize,
    weights: Vec<f64>,
}

impl BlurKernel {
    /// Validates taps and renormalizes them. The raw sum must already be
    /// within `1e-3` of one.
    pub fn new(height: usize, width: usize, weights: Vec<f64>) -> Result<Self> {
        let sum = Self::validate(height, width, &weights)?;
        if (sum - 1.0).abs() > LOAD_SUM_TOLERANCE {
            return Err(Error::KernelFormat(format!(
                "taps sum to {sum}, expected 1 within {LOAD_SUM_TOLERANCE}"
            )));
        }
        Ok(Self::from_validated(height, width, weights, sum))
    }

    /// Divides arbitrary nonnegative taps by their sum.
    pub fn normalized(height: usize, width: usize, weights: Vec<f64>) -> Result<Self> {
        let sum = Self::validate(height, width, &weights)?;
        if sum <= 0.0 {
            return Err(Error::KernelFormat("taps sum to zero".into()));
        }
        Ok(Self::from_validated(height, width, weights, sum))
    }

    fn validate(height: usize, width: usize, weights: &[f64]) -> Result<f64> {
        if height == 0 || width == 0 {
            return Err(Error::KernelFormat("empty kernel".into()));
        }
        if weights.len() != height * width {
            return Err(Error::KernelFormat(format!(
                "expected {} taps for {height}x{width}, got {}",
                height * width,
                weights.len()
            )));
        }
        if let Some(bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::KernelFormat(format!(
                "taps must be finite and nonnegative, found {bad}"
            )));
        }
        Ok(weights.iter().sum())
    }

    fn from_validated(height: usize, width: usize, mut weights: Vec<f64>, sum: f64) -> Self {
        // Already-normalized taps are kept bit-exact.
        if (sum - 1.0).abs() > 1e-12 {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Self {
            height,
            width,
            weights,
        }
    }

    pub fn delta() -> Self {
        Self {
            height: 1,
            width: 1,
            weights: vec![1.0],
        }
    }

    /// Anisotropic Gaussian sampled at integer offsets from the center,
    /// with principal axes rotated by `theta` radians.
    pub fn gaussian(sigma_x: f64, sigma_y: f64, theta: f64, size: usize) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::invalid(format!("gaussian kernel size must be odd, got {size}")));
        }
        if !(sigma_x > 0.0 && sigma_y > 0.0) {
            return Err(Error::invalid("gaussian sigmas must be positive"));
        }
        let center = (size / 2) as f64;
        let (sin, cos) = theta.sin_cos();
        let mut weights = Vec::with_capacity(size * size);
        for i in 0..size {
            for j in 0..size {
                let (dy, dx) = (i as f64 - center, j as f64 - center);
                let u = cos * dx + sin * dy;
                let v = -sin * dx + cos * dy;
                let e = u * u / (2.0 * sigma_x * sigma_x) + v * v / (2.0 * sigma_y * sigma_y);
                weights.push((-e).exp());
            }
        }
        Self::normalized(size, size, weights)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.width + j]
    }

    /// The kernel rotated by 180°, i.e. the correlation counterpart.
    pub fn rotate180(&self) -> Self {
        let mut weights = self.weights.clone();
        weights.reverse();
        Self {
            height: self.height,
            width: self.width,
            weights,
        }
    }

    pub fn is_delta(&self) -> bool {
        self.weights.iter().filter(|&&w| w != 0.0).count() == 1
            && self.get(self.height / 2, self.width / 2) == 1.0
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::KernelFormat("missing `kh kw` header".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::KernelFormat(format!("bad header {header:?}: {e}")))?;
        let [kh, kw] = dims[..] else {
            return Err(Error::KernelFormat(format!(
                "header must hold two integers, got {header:?}"
            )));
        };

        let mut weights = Vec::with_capacity(kh * kw);
        for row in 0..kh {
            let line = lines
                .next()
                .ok_or_else(|| Error::KernelFormat(format!("missing row {row}")))?;
            let before = weights.len();
            for tok in line.split_whitespace() {
                let v = tok
                    .parse::<f64>()
                    .map_err(|e| Error::KernelFormat(format!("row {row}: {tok:?}: {e}")))?;
                weights.push(v);
            }
            if weights.len() - before != kw {
                return Err(Error::KernelFormat(format!(
                    "row {row} holds {} taps, expected {kw}",
                    weights.len() - before
                )));
            }
        }
        if lines.next().is_some() {
            return Err(Error::KernelFormat(format!("more than {kh} rows")));
        }
        Self::new(kh, kw, weights)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Text form. Taps use Rust's shortest round-trip float formatting, so
    /// `parse(to_text())` is exact.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.height, self.width);
        for row in self.weights.chunks_exact(self.width) {
            let line: Vec<String> = row.iter().map(|w| format!("{w:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }
}
