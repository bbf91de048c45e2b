use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::Image;

/// Standard normal field from ChaCha8 (seeded with `seed_from_u64`) and the
/// Box–Muller transform, consumed in (cos, sin) pairs.
pub fn gaussian_field(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(len + 1);
    while out.len() < len {
        // u1 in (0, 1] keeps the logarithm finite.
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(len);
    out
}

/// Adds i.i.d. `N(0, (sigma255/255)^2)` noise. No clipping.
pub fn add_awgn(img: &Image, sigma255: f64, seed: u64) -> Result<Image> {
    if !(sigma255 >= 0.0 && sigma255.is_finite()) {
        return Err(Error::invalid(format!("noise level must be >= 0, got {sigma255}")));
    }
    if sigma255 == 0.0 {
        return Ok(img.clone());
    }
    let sigma = sigma255 / 255.0;
    let noise = gaussian_field(img.len(), seed);
    let (c, h, w) = img.shape();
    Image::new(
        c,
        h,
        w,
        img.data()
            .iter()
            .zip(&noise)
            .map(|(v, n)| v + sigma * n)
            .collect(),
    )
}
