//! Image container, PNG boundary, dihedral transforms and quality metrics.

mod codec;
mod dihedral;
mod image;
mod metrics;

pub use codec::{decode_png, encode_png, quantize_u8, read_png, write_png};
pub use dihedral::Dihedral8;
pub use image::Image;
pub use metrics::{mse, psnr};
