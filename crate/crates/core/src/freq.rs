//! 2-D FFT helpers: optical transfer functions, circular convolution and the
//! distinct-block spectral operators behind the super-resolution closed form.
//!
//! Forward transforms are unnormalized; inverse transforms carry the `1/N`.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::kernel::BlurKernel;
use crate::tensor::Image;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// A single complex plane in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != height * width || height == 0 || width == 0 {
            return Err(Error::shape(format!(
                "spectrum data length {} vs {height}x{width}",
                data.len()
            )));
        }
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let data = (0..height * width).map(|k| f(k / width, k % width)).collect();
        Self {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.width + j]
    }

    pub fn conj(&self) -> Spectrum {
        self.map(|v| v.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Spectrum {
        Spectrum {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &Spectrum,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Spectrum> {
        if (self.height, self.width) != (other.height, other.width) {
            return Err(Error::shape(format!(
                "spectrum {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(Spectrum {
            height: self.height,
            width: self.width,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn mul(&self, other: &Spectrum) -> Result<Spectrum> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }
}

fn transform(height: usize, width: usize, data: &mut [Complex64], direction: FftDirection) {
    PLANNER.with(|planner| {
        let mut planner = planner.borrow_mut();
        let row_fft = planner.plan_fft(width, direction);
        let col_fft = planner.plan_fft(height, direction);
        drop(planner);

        for row in data.chunks_exact_mut(width) {
            row_fft.process(row);
        }
        let mut column = vec![Complex64::default(); height];
        for j in 0..width {
            for i in 0..height {
                column[i] = data[i * width + j];
            }
            col_fft.process(&mut column);
            for i in 0..height {
                data[i * width + j] = column[i];
            }
        }
    });
}

/// Unnormalized forward 2-D DFT of a real plane.
pub fn fft2(height: usize, width: usize, plane: &[f64]) -> Spectrum {
    assert_eq!(plane.len(), height * width, "plane size");
    let mut data: Vec<Complex64> = plane.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(height, width, &mut data, FftDirection::Forward);
    Spectrum {
        height,
        width,
        data,
    }
}

/// Forward transform of every channel of `img`.
pub fn fft2_image(img: &Image) -> Vec<Spectrum> {
    img.planes()
        .map(|p| fft2(img.height(), img.width(), p))
        .collect()
}

/// Inverse 2-D DFT (scaled by `1/N`), keeping the full complex result.
pub fn ifft2(spec: &Spectrum) -> Vec<Complex64> {
    let mut data = spec.data.clone();
    transform(spec.height, spec.width, &mut data, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// Inverse transform keeping only the real part.
pub fn ifft2_real(spec: &Spectrum) -> Vec<f64> {
    ifft2(spec).into_iter().map(|v| v.re).collect()
}

/// OTF of an arbitrary (possibly signed) `kh` x `kw` tap array on a
/// `height` x `width` grid, with the tap at `(kh/2, kw/2)` moved to the origin.
pub fn psf2otf_taps(
    kh: usize,
    kw: usize,
    taps: &[f64],
    height: usize,
    width: usize,
) -> Result<Spectrum> {
    if kh > height || kw > width {
        return Err(Error::shape(format!(
            "kernel {kh}x{kw} larger than {height}x{width} plane"
        )));
    }
    assert_eq!(taps.len(), kh * kw, "tap count");
    let (ch, cw) = (kh / 2, kw / 2);
    let mut plane = vec![0.0; height * width];
    for a in 0..kh {
        for b in 0..kw {
            let i = (a + height - ch) % height;
            let j = (b + width - cw) % width;
            plane[i * width + j] += taps[a * kw + b];
        }
    }
    Ok(fft2(height, width, &plane))
}

pub fn psf2otf(kernel: &BlurKernel, height: usize, width: usize) -> Result<Spectrum> {
    psf2otf_taps(kernel.height(), kernel.width(), kernel.weights(), height, width)
}

/// Multiplies every channel spectrum by `otf` and returns the real part.
pub(crate) fn apply_otf(img: &Image, otf: &Spectrum) -> Result<Image> {
    img.map_planes(img.height(), img.width(), |p| {
        let spec = fft2(img.height(), img.width(), p);
        let prod = spec.mul(otf).expect("otf sized to image");
        ifft2_real(&prod)
    })
}

/// Per-channel circular convolution with the kernel centered at `(kh/2, kw/2)`.
pub fn circular_convolve(img: &Image, kernel: &BlurKernel) -> Result<Image> {
    let otf = psf2otf(kernel, img.height(), img.width())?;
    apply_otf(img, &otf)
}

fn check_block_factor(height: usize, width: usize, factor: usize) -> Result<()> {
    if factor == 0 || height % factor != 0 || width % factor != 0 {
        return Err(Error::shape(format!(
            "{height}x{width} not divisible by block factor {factor}"
        )));
    }
    Ok(())
}

/// Mean over the `factor`² distinct blocks: entry `(i, j)` averages
/// `(i + a·H/f, j + b·W/f)` for all `a, b < f`.
pub fn block_downsample_spectrum(spec: &Spectrum, factor: usize) -> Result<Spectrum> {
    check_block_factor(spec.height, spec.width, factor)?;
    let (bh, bw) = (spec.height / factor, spec.width / factor);
    let mut out = vec![Complex64::default(); bh * bw];
    for i in 0..spec.height {
        let row = &spec.data[i * spec.width..(i + 1) * spec.width];
        let dst = &mut out[(i % bh) * bw..(i % bh + 1) * bw];
        for (j, v) in row.iter().enumerate() {
            dst[j % bw] += v;
        }
    }
    let scale = 1.0 / (factor * factor) as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Spectrum::new(bh, bw, out)
}

/// Tiles `small` over the `factor`² distinct blocks of `large` and multiplies
/// element-wise.
pub fn block_multiply_spectrum(
    large: &Spectrum,
    small: &Spectrum,
    factor: usize,
) -> Result<Spectrum> {
    check_block_factor(large.height, large.width, factor)?;
    let (bh, bw) = (large.height / factor, large.width / factor);
    if (small.height, small.width) != (bh, bw) {
        return Err(Error::shape(format!(
            "block operand {}x{} does not match {bh}x{bw}",
            small.height, small.width
        )));
    }
    Ok(Spectrum::from_fn(large.height, large.width, |i, j| {
        large.get(i, j) * small.get(i % bh, j % bw)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_kernel_otf_is_ones() {
        let otf = psf2otf(&BlurKernel::delta(), 5, 6).unwrap();
        assert!(otf.data().iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn otf_dc_is_kernel_sum() {
        let k = BlurKernel::gaussian(1.3, 0.8, 0.4, 5).unwrap();
        let otf = psf2otf(&k, 9, 7).unwrap();
        assert!((otf.get(0, 0) - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn kernel_must_fit() {
        let k = BlurKernel::gaussian(1.0, 1.0, 0.0, 5).unwrap();
        assert!(psf2otf(&k, 4, 8).is_err());
    }

    #[test]
    fn round_trip() {
        let plane: Vec<f64> = (0..30).map(|v| ((v * 7919) % 31) as f64 / 31.0).collect();
        let back = ifft2_real(&fft2(5, 6, &plane));
        for (a, b) in plane.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_block_mean() {
        let s = Spectrum::new(2, 2, vec![c(1.0, 2.0), c(3.0, 0.0), c(-1.0, 1.0), c(5.0, -7.0)])
            .unwrap();
        let d = block_downsample_spectrum(&s, 2).unwrap();
        assert_eq!(d.data(), &[c(2.0, -1.0)]);
        assert_eq!(block_downsample_spectrum(&s, 1).unwrap(), s);
    }

    #[test]
    fn block_ops_reject_bad_shapes() {
        let s = Spectrum::from_fn(4, 6, |i, j| c(i as f64, j as f64));
        assert!(block_downsample_spectrum(&s, 4).is_err());
        let small = Spectrum::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert!(block_multiply_spectrum(&s, &small, 2).is_err());
    }

    #[test]
    fn block_multiply_identity_cases() {
        let a = Spectrum::from_fn(4, 4, |i, j| c(i as f64 - 1.5, j as f64 * 0.5));
        let ones = Spectrum::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert_eq!(block_multiply_spectrum(&a, &ones, 2).unwrap(), a);
        let b = a.map(|v| v * c(0.5, 2.0));
        assert_eq!(block_multiply_spectrum(&a, &b, 1).unwrap(), a.mul(&b).unwrap());
    }
}
