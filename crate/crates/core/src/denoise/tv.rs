//! Isotropic total-variation proximal map, solved on the dual with
//! accelerated gradient projection (Beck–Teboulle FGP).

use crate::tensor::Image;

/// Dual step, in units of `1/weight`; `1/8` bounds `‖∇‖²`.
pub const TV_STEP: f64 = 0.125;
pub const TV_MAX_ITERS: usize = 1000;
/// Stop once an iteration moves the primal estimate by less than this
/// (max-abs).
pub const TV_TOL: f64 = 1e-7;

/// Isotropic TV with forward differences and a zero difference past the
/// last row/column.
pub fn tv_iso(plane: &[f64], height: usize, width: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..height {
        for j in 0..width {
            let v = plane[i * width + j];
            let dx = if j + 1 < width { plane[i * width + j + 1] - v } else { 0.0 };
            let dy = if i + 1 < height { plane[(i + 1) * width + j] - v } else { 0.0 };
            acc += (dx * dx + dy * dy).sqrt();
        }
    }
    acc
}

fn divergence(px: &[f64], py: &[f64], height: usize, width: usize, out: &mut [f64]) {
    for i in 0..height {
        for j in 0..width {
            let k = i * width + j;
            let mut d = 0.0;
            if j + 1 < width {
                d += px[k];
            }
            if j > 0 {
                d -= px[k - 1];
            }
            if i + 1 < height {
                d += py[k];
            }
            if i > 0 {
                d -= py[k - width];
            }
            out[k] = d;
        }
    }
}

/// Approximately solves `min_u ½‖u − f‖² + weight·TV(u)` for one plane.
pub fn tv_prox_plane(f: &[f64], height: usize, width: usize, weight: f64) -> Vec<f64> {
    if weight <= 0.0 {
        return f.to_vec();
    }
    let n = height * width;
    // Dual field p, its extrapolation q, and the primal u = f − weight·div q.
    let (mut px, mut py) = (vec![0.0; n], vec![0.0; n]);
    let (mut qx, mut qy) = (vec![0.0; n], vec![0.0; n]);
    let mut div = vec![0.0; n];
    let mut u = f.to_vec();
    let mut prev_u = f.to_vec();
    let step = TV_STEP / weight;
    let mut t = 1.0f64;

    for iter in 0..TV_MAX_ITERS {
        divergence(&qx, &qy, height, width, &mut div);
        for k in 0..n {
            u[k] = f[k] - weight * div[k];
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        for i in 0..height {
            for j in 0..width {
                let k = i * width + j;
                let gx = if j + 1 < width { u[k + 1] - u[k] } else { 0.0 };
                let gy = if i + 1 < height { u[k + width] - u[k] } else { 0.0 };
                let mut nx = qx[k] - step * gx;
                let mut ny = qy[k] - step * gy;
                let m = (nx * nx + ny * ny).sqrt();
                if m > 1.0 {
                    nx /= m;
                    ny /= m;
                }
                qx[k] = nx + momentum * (nx - px[k]);
                qy[k] = ny + momentum * (ny - py[k]);
                px[k] = nx;
                py[k] = ny;
            }
        }
        t = t_next;
        let moved = u.iter().zip(&prev_u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if iter > 0 && moved < TV_TOL {
            break;
        }
        prev_u.copy_from_slice(&u);
    }

    divergence(&px, &py, height, width, &mut div);
    f.iter().zip(&div).map(|(v, d)| v - weight * d).collect()
}

/// Orthonormal luma/opponent-chroma basis, rows are output channels.
const OPPONENT: [[f64; 3]; 3] = [
    [0.577_350_269_189_625_8, 0.577_350_269_189_625_8, 0.577_350_269_189_625_8],
    [0.707_106_781_186_547_6, 0.0, -0.707_106_781_186_547_6],
    [0.408_248_290_463_863, -0.816_496_580_927_726, 0.408_248_290_463_863],
];

fn mix(planes: [&[f64]; 3], m: &[[f64; 3]; 3], transpose: bool) -> Vec<Vec<f64>> {
    let n = planes[0].len();
    (0..3)
        .map(|r| {
            let w = |c: usize| if transpose { m[c][r] } else { m[r][c] };
            (0..n)
                .map(|k| w(0) * planes[0][k] + w(1) * planes[1][k] + w(2) * planes[2][k])
                .collect()
        })
        .collect()
}

/// TV prox applied plane by plane. Three-channel images are first rotated
/// into an orthonormal luma/opponent-chroma basis and rotated back after.
pub fn tv_prox(img: &Image, weight: f64) -> Image {
    let (c, h, w) = img.shape();
    if c != 3 || weight <= 0.0 {
        return img
            .map_planes(h, w, |p| tv_prox_plane(p, h, w, weight))
            .expect("shape preserved");
    }
    let opp = mix([img.plane(0), img.plane(1), img.plane(2)], &OPPONENT, false);
    let smoothed: Vec<Vec<f64>> = opp.iter().map(|p| tv_prox_plane(p, h, w, weight)).collect();
    let back = mix([&smoothed[0], &smoothed[1], &smoothed[2]], &OPPONENT, true);
    Image::from_planes(h, w, back).expect("shape preserved")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_weight_is_identity() {
        let img = Image::from_fn(1, 5, 5, |_, i, j| ((i * 3 + j) % 4) as f64 / 4.0);
        assert_eq!(tv_prox(&img, 0.0), img);
    }

    #[test]
    fn constants_are_fixed() {
        let img = Image::filled(3, 6, 7, 0.37);
        let out = tv_prox(&img, 0.5);
        assert!(out.max_abs_diff(&img).unwrap() < 1e-14);
    }

    #[test]
    fn opponent_basis_is_orthonormal() {
        for a in 0..3 {
            for b in 0..3 {
                let d: f64 = (0..3).map(|k| OPPONENT[a][k] * OPPONENT[b][k]).sum();
                assert!((d - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gray_color_image_matches_plane_prox() {
        // Equal channels have zero chroma, so only luma is smoothed.
        let g = Image::from_fn(1, 6, 6, |_, i, j| ((i * 5 + j * 3) % 7) as f64 / 7.0);
        let rgb = Image::from_fn(3, 6, 6, |_, i, j| g.get(0, i, j));
        let w = 0.04;
        let a = tv_prox(&rgb, w);
        let b = tv_prox(&g, w / 3f64.sqrt());
        for c in 0..3 {
            for (x, y) in a.plane(c).iter().zip(b.plane(0)) {
                assert!((x - y).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn tv_of_step() {
        let plane = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(tv_iso(&plane, 2, 2), 2.0);
    }

    #[test]
    fn reduces_total_variation() {
        let img = Image::from_fn(1, 8, 8, |_, i, j| ((i * 7 + j * 13) % 5) as f64 / 5.0);
        let out = tv_prox(&img, 0.05);
        assert!(tv_iso(out.plane(0), 8, 8) < tv_iso(img.plane(0), 8, 8));
        // Mean is preserved: div p sums to zero.
        let m0: f64 = img.data().iter().sum();
        let m1: f64 = out.data().iter().sum();
        assert!((m0 - m1).abs() < 1e-12);
    }
}
