//! Starting points `z_0` for each task.

use crate::degrade::{bicubic_resize, CfaPattern, Channel, Task};
use crate::error::{Error, Result};
use crate::tensor::Image;

/// Initial estimate of the latent image from the observation.
///
/// * deblurring: the observation itself;
/// * super-resolution: bicubic upscaling, re-sampled bilinearly at an offset
///   of `(s-1)/2` so that low-resolution sample `(i, j)` lands on the
///   high-resolution site `(s·i, s·j)` kept by the s-fold downsampler;
/// * demosaicing: Malvar–He–Cutler gradient-corrected interpolation.
pub fn initialize(task: &Task, y: &Image) -> Result<Image> {
    match task {
        Task::Deblur { .. } => Ok(y.clone()),
        Task::ClassicalSr { scale, .. } | Task::BicubicSr { scale } => {
            let up = bicubic_resize(y, *scale as f64)?;
            Ok(shift_bilinear(&up, (*scale as f64 - 1.0) / 2.0))
        }
        Task::Demosaic { pattern } => {
            if y.channels() != 3 {
                return Err(Error::shape("demosaicing needs a 3-channel observation"));
            }
            let (_, h, w) = y.shape();
            let raw: Vec<f64> = (0..h * w)
                .map(|k| {
                    let (i, j) = (k / w, k % w);
                    y.plane(pattern.channel_at(i, j).index())[k]
                })
                .collect();
            Ok(malvar_demosaic(&raw, h, w, *pattern))
        }
    }
}

/// Samples `img` at `(i + offset, j + offset)` with bilinear weights,
/// clamping coordinates to the image.
pub fn shift_bilinear(img: &Image, offset: f64) -> Image {
    if offset == 0.0 {
        return img.clone();
    }
    let (c, h, w) = img.shape();
    let axis = |n: usize| -> Vec<(usize, usize, f64)> {
        (0..n)
            .map(|p| {
                let u = (p as f64 + offset).clamp(0.0, (n - 1) as f64);
                let lo = u.floor() as usize;
                let hi = (lo + 1).min(n - 1);
                (lo, hi, u - lo as f64)
            })
            .collect()
    };
    let (rows, cols) = (axis(h), axis(w));
    Image::from_fn(c, h, w, |ch, i, j| {
        let (r0, r1, fr) = rows[i];
        let (c0, c1, fc) = cols[j];
        let top = (1.0 - fc) * img.get(ch, r0, c0) + fc * img.get(ch, r0, c1);
        let bottom = (1.0 - fc) * img.get(ch, r1, c0) + fc * img.get(ch, r1, c1);
        (1.0 - fr) * top + fr * bottom
    })
}

/// Mirror index without repeating the edge sample, so CFA parity is kept.
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let mut i = i.rem_euclid(period);
    if i >= n as isize {
        i = period - i;
    }
    i as usize
}

// 5×5 gradient-corrected filters, in units of 1/8, as (dy, dx, weight).
const G_AT_RB: &[(isize, isize, f64)] = &[
    (0, 0, 4.0),
    (-1, 0, 2.0),
    (1, 0, 2.0),
    (0, -1, 2.0),
    (0, 1, 2.0),
    (-2, 0, -1.0),
    (2, 0, -1.0),
    (0, -2, -1.0),
    (0, 2, -1.0),
];

/// Chroma at a green site whose horizontal neighbours carry that chroma.
const C_AT_G_ROW: &[(isize, isize, f64)] = &[
    (0, 0, 5.0),
    (0, -1, 4.0),
    (0, 1, 4.0),
    (0, -2, -1.0),
    (0, 2, -1.0),
    (-1, -1, -1.0),
    (-1, 1, -1.0),
    (1, -1, -1.0),
    (1, 1, -1.0),
    (-2, 0, 0.5),
    (2, 0, 0.5),
];

/// Chroma at a green site whose vertical neighbours carry that chroma.
const C_AT_G_COL: &[(isize, isize, f64)] = &[
    (0, 0, 5.0),
    (-1, 0, 4.0),
    (1, 0, 4.0),
    (-2, 0, -1.0),
    (2, 0, -1.0),
    (-1, -1, -1.0),
    (-1, 1, -1.0),
    (1, -1, -1.0),
    (1, 1, -1.0),
    (0, -2, 0.5),
    (0, 2, 0.5),
];

/// Red at blue sites and blue at red sites.
const C_AT_OPPOSITE: &[(isize, isize, f64)] = &[
    (0, 0, 6.0),
    (-1, -1, 2.0),
    (-1, 1, 2.0),
    (1, -1, 2.0),
    (1, 1, 2.0),
    (-2, 0, -1.5),
    (2, 0, -1.5),
    (0, -2, -1.5),
    (0, 2, -1.5),
];

/// Malvar–He–Cutler demosaicing of a raw Bayer plane with mirrored borders.
pub fn malvar_demosaic(raw: &[f64], height: usize, width: usize, pattern: CfaPattern) -> Image {
    let at = |i: usize, j: usize, filter: &[(isize, isize, f64)]| -> f64 {
        filter
            .iter()
            .map(|&(dy, dx, wt)| {
                let ii = reflect(i as isize + dy, height);
                let jj = reflect(j as isize + dx, width);
                wt * raw[ii * width + jj]
            })
            .sum::<f64>()
            / 8.0
    };

    let mut planes = vec![vec![0.0; height * width]; 3];
    for i in 0..height {
        for j in 0..width {
            let k = i * width + j;
            let here = pattern.channel_at(i, j);
            planes[here.index()][k] = raw[k];
            match here {
                Channel::G => {
                    let horizontal = pattern.channel_at(i, j + 1);
                    let vertical = pattern.channel_at(i + 1, j);
                    planes[horizontal.index()][k] = at(i, j, C_AT_G_ROW);
                    planes[vertical.index()][k] = at(i, j, C_AT_G_COL);
                }
                Channel::R | Channel::B => {
                    let other = if here == Channel::R { Channel::B } else { Channel::R };
                    planes[Channel::G.index()][k] = at(i, j, G_AT_RB);
                    planes[other.index()][k] = at(i, j, C_AT_OPPOSITE);
                }
            }
        }
    }
    Image::from_planes(height, width, planes).expect("demosaic output shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degrade::{mosaic, BlurKernel};

    #[test]
    fn filters_sum_to_one() {
        for f in [G_AT_RB, C_AT_G_ROW, C_AT_G_COL, C_AT_OPPOSITE] {
            let s: f64 = f.iter().map(|t| t.2).sum();
            assert_eq!(s, 8.0);
        }
    }

    #[test]
    fn reflect_keeps_parity() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(-2, 5), 2);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(6, 5), 2);
        assert_eq!(reflect(3, 1), 0);
    }

    #[test]
    fn deblur_starts_from_observation() {
        let y = Image::from_fn(1, 4, 4, |_, i, j| (i + j) as f64 / 6.0);
        let task = Task::Deblur {
            kernel: BlurKernel::delta(),
        };
        assert_eq!(initialize(&task, &y).unwrap(), y);
    }

    #[test]
    fn sr_constant_stays_constant() {
        let y = Image::filled(3, 5, 4, 0.3);
        let task = Task::ClassicalSr {
            scale: 2,
            kernel: BlurKernel::delta(),
        };
        let z0 = initialize(&task, &y).unwrap();
        assert_eq!(z0.shape(), (3, 10, 8));
        assert!(z0.data().iter().all(|v| (v - 0.3).abs() < 1e-12));
    }

    #[test]
    fn sr_odd_scale_aligns_samples() {
        // For odd s the shift is an integer, so kept sites reproduce y.
        let y = Image::from_fn(1, 6, 6, |_, i, j| ((i * 5 + j * 3) % 7) as f64 / 7.0);
        let task = Task::BicubicSr { scale: 3 };
        let z0 = initialize(&task, &y).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert!((z0.get(0, 3 * i, 3 * j) - y.get(0, i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn demosaic_constant_gray() {
        for p in ["RGGB", "BGGR", "GRBG", "GBRG"] {
            let pattern: CfaPattern = p.parse().unwrap();
            let y = mosaic(&Image::filled(3, 7, 6, 0.45), pattern).unwrap();
            let z0 = initialize(&Task::Demosaic { pattern }, &y).unwrap();
            assert!(z0.data().iter().all(|v| (v - 0.45).abs() < 1e-12), "{p}");
        }
    }

    #[test]
    fn demosaic_keeps_observed_samples() {
        let x = Image::from_fn(3, 8, 8, |c, i, j| ((c * 7 + i * 3 + j * 5) % 13) as f64 / 13.0);
        let y = mosaic(&x, CfaPattern::RGGB).unwrap();
        let z0 = initialize(&Task::Demosaic { pattern: CfaPattern::RGGB }, &y).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let c = CfaPattern::RGGB.channel_at(i, j).index();
                assert_eq!(z0.get(c, i, j), x.get(c, i, j));
            }
        }
    }

    #[test]
    fn demosaic_linear_ramp_is_exact_inside() {
        // Gradient-corrected filters reproduce linear signals away from borders.
        let x = Image::from_fn(3, 10, 10, |_, i, j| 0.1 + 0.03 * i as f64 + 0.02 * j as f64);
        let y = mosaic(&x, CfaPattern::RGGB).unwrap();
        let z0 = initialize(&Task::Demosaic { pattern: CfaPattern::RGGB }, &y).unwrap();
        for c in 0..3 {
            for i in 2..8 {
                for j in 2..8 {
                    assert!((z0.get(c, i, j) - x.get(c, i, j)).abs() < 1e-12);
                }
            }
        }
    }
}
