//! Forward degradation models and seeded noise synthesis.

mod bicubic;
mod cfa;
mod noise;
mod sampling;

pub use bicubic::{bicubic_equivalent_taps, bicubic_resize, cubic};
pub use cfa::{cfa_mask, mosaic, CfaPattern, Channel};
pub use noise::{add_awgn, gaussian_field};
pub use sampling::{sfold_downsample, zerofill_upsample};

pub use crate::kernel::BlurKernel;

use crate::error::{Error, Result};
use crate::freq::circular_convolve;
use crate::tensor::Image;

/// Which restoration problem an observation comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum Task {
    /// `y = x ⊗ k + n`
    Deblur { kernel: BlurKernel },
    /// `y = (x ⊗ k)↓s + n`
    ClassicalSr { scale: usize, kernel: BlurKernel },
    /// `y = x↓bicubic_s + n`
    BicubicSr { scale: usize },
    /// `y = M ⊙ x + n`
    Demosaic { pattern: CfaPattern },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Deblur { .. } => "deblur",
            Task::ClassicalSr { .. } => "sr-classical",
            Task::BicubicSr { .. } => "sr-bicubic",
            Task::Demosaic { .. } => "demosaic",
        }
    }

    /// Upscaling factor between observation and latent image (1 when equal).
    pub fn scale(&self) -> usize {
        match self {
            Task::ClassicalSr { scale, .. } | Task::BicubicSr { scale } => *scale,
            _ => 1,
        }
    }

    /// Shape of the latent image that produces an observation of `y`'s shape.
    pub fn latent_shape(&self, y: &Image) -> (usize, usize, usize) {
        let s = self.scale();
        (y.channels(), y.height() * s, y.width() * s)
    }
}

/// A task together with its noise level on the 0–255 scale.
#[derive(Clone, Debug, PartialEq)]
pub struct DegradationSpec {
    pub task: Task,
    pub sigma: f64,
}

impl DegradationSpec {
    pub fn new(task: Task, sigma: f64) -> Self {
        Self { task, sigma }
    }
}

/// Noise-free forward operator `T(x)`.
pub fn forward(img: &Image, task: &Task) -> Result<Image> {
    match task {
        Task::Deblur { kernel } => circular_convolve(img, kernel),
        Task::ClassicalSr { scale, kernel } => {
            let blurred = if kernel.is_delta() {
                img.clone()
            } else {
                circular_convolve(img, kernel)?
            };
            sfold_downsample(&blurred, *scale)
        }
        Task::BicubicSr { scale } => {
            if *scale == 0 {
                return Err(Error::invalid("scale must be positive"));
            }
            bicubic_resize(img, 1.0 / *scale as f64)
        }
        Task::Demosaic { pattern } => mosaic(img, *pattern),
    }
}

/// `T(x) + n` with AWGN drawn from `seed`. For demosaicing the noise is
/// masked too, so unobserved entries stay exactly zero.
pub fn apply_degradation(img: &Image, spec: &DegradationSpec, seed: u64) -> Result<Image> {
    let clean = forward(img, &spec.task)?;
    let noisy = add_awgn(&clean, spec.sigma, seed)?;
    match &spec.task {
        Task::Demosaic { pattern } => mosaic(&noisy, *pattern),
        _ => Ok(noisy),
    }
}
