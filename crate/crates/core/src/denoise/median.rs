use crate::tensor::Image;

/// 3×3 median with edge replication.
pub fn median3x3(img: &Image) -> Image {
    let (_, h, w) = img.shape();
    img.map_planes(h, w, |p| {
        let mut out = Vec::with_capacity(h * w);
        let mut win = [0.0f64; 9];
        for i in 0..h {
            for j in 0..w {
                let mut n = 0;
                for di in -1isize..=1 {
                    for dj in -1isize..=1 {
                        let ii = (i as isize + di).clamp(0, h as isize - 1) as usize;
                        let jj = (j as isize + dj).clamp(0, w as isize - 1) as usize;
                        win[n] = p[ii * w + jj];
                        n += 1;
                    }
                }
                win.sort_by(f64::total_cmp);
                out.push(win[4]);
            }
        }
        out
    })
    .expect("shape preserved")
}
