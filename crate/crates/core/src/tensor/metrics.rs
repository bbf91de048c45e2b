use super::Image;
use crate::error::{Error, Result};

/// Mean squared error over all channels, ignoring `border` pixels on each side.
pub fn mse(a: &Image, b: &Image, border: usize) -> Result<f64> {
    a.check_same_shape(b, "mse")?;
    let (c, h, w) = a.shape();
    if 2 * border >= h.min(w) {
        return Err(Error::invalid(format!(
            "border {border} leaves nothing of a {h}x{w} image"
        )));
    }
    let mut acc = 0.0;
    for ch in 0..c {
        let (pa, pb) = (a.plane(ch), b.plane(ch));
        for i in border..h - border {
            for j in border..w - border {
                let d = pa[i * w + j] - pb[i * w + j];
                acc += d * d;
            }
        }
    }
    let n = c * (h - 2 * border) * (w - 2 * border);
    Ok(acc / n as f64)
}

/// Peak signal-to-noise ratio for unit peak, in dB. Identical inputs give
/// `f64::INFINITY`.
pub fn psnr(a: &Image, b: &Image, border: usize) -> Result<f64> {
    let m = mse(a, b, border)?;
    Ok(if m == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / m).log10()
    })
}
