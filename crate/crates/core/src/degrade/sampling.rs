use crate::error::{Error, Result};
use crate::tensor::Image;

/// s-fold standard downsampler: keeps the upper-left pixel of every s×s patch.
pub fn sfold_downsample(img: &Image, s: usize) -> Result<Image> {
    let (_, h, w) = img.shape();
    if s == 0 || h % s != 0 || w % s != 0 {
        return Err(Error::shape(format!("{h}x{w} not divisible by {s}")));
    }
    let (oh, ow) = (h / s, w / s);
    img.map_planes(oh, ow, |p| {
        let mut out = Vec::with_capacity(oh * ow);
        for i in 0..oh {
            for j in 0..ow {
                out.push(p[s * i * w + s * j]);
            }
        }
        out
    })
}

/// Adjoint of [`sfold_downsample`]: spreads samples onto an s-times larger
/// grid, zero everywhere else.
pub fn zerofill_upsample(img: &Image, s: usize) -> Result<Image> {
    if s == 0 {
        return Err(Error::invalid("upsampling factor must be positive"));
    }
    let (_, h, w) = img.shape();
    let (oh, ow) = (h * s, w * s);
    img.map_planes(oh, ow, |p| {
        let mut out = vec![0.0; oh * ow];
        for i in 0..h {
            for j in 0..w {
                out[s * i * ow + s * j] = p[i * w + j];
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_one_is_identity() {
        let img = Image::from_fn(3, 3, 5, |c, i, j| (c + i * 5 + j) as f64 / 20.0);
        assert_eq!(sfold_downsample(&img, 1).unwrap(), img);
        assert_eq!(zerofill_upsample(&img, 1).unwrap(), img);
    }

    #[test]
    fn upper_left_selection() {
        let img = Image::new(1, 2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(sfold_downsample(&img, 2).unwrap().data(), &[0.1]);
        assert!(sfold_downsample(&Image::zeros(1, 3, 4), 2).is_err());
    }

    #[test]
    fn ramp_by_three() {
        let img = Image::from_fn(1, 6, 6, |_, i, j| (i * 6 + j) as f64);
        let d = sfold_downsample(&img, 3).unwrap();
        assert_eq!(d.data(), &[0.0, 3.0, 18.0, 21.0]);
    }

    #[test]
    fn zero_fill() {
        let img = Image::new(1, 1, 1, vec![0.7]).unwrap();
        assert_eq!(zerofill_upsample(&img, 2).unwrap().data(), &[0.7, 0.0, 0.0, 0.0]);
    }
}
