//! Plug-and-play image restoration by half-quadratic splitting.
//!
//! A restoration alternates an exact (or back-projected) data step with a
//! Gaussian denoiser whose noise level decreases geometrically over the
//! iterations. Deblurring, single-image super-resolution (classical and
//! bicubic degradations) and Bayer demosaicing are supported.
//!
//! ```no_run
//! use pnp_restore::degrade::{DegradationSpec, Task, BlurKernel};
//! use pnp_restore::denoise::DenoiserHandle;
//! use pnp_restore::solver::{default_tv_kappa, run, RestorationJob};
//! use pnp_restore::tensor::read_png;
//!
//! let y = read_png("blurry.png").unwrap();
//! let kernel = BlurKernel::load("kernel.txt").unwrap();
//! let spec = DegradationSpec::new(Task::Deblur { kernel }, 7.65);
//! let kappa = default_tv_kappa(&spec.task);
//! let job = RestorationJob::with_defaults(spec, y).unwrap();
//! let restored = run(&job, &mut DenoiserHandle::Tv { kappa }).unwrap();
//! println!("{} iterations", restored.trace.len());
//! ```

pub mod degrade;
pub mod denoise;
pub mod diagnostics;
mod error;
pub mod freq;
pub mod kernel;
pub mod prox;
pub mod schedule;
pub mod solver;
pub mod tensor;

pub use error::{Error, Phase, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
