use crate::error::{Error, Result};

/// Planar, channel-major real image.
///
/// Values are nominally in `[0, 1]` but are never clamped here; iterates of
/// the restoration loop routinely leave that range. Clamping only happens on
/// 8-bit export.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if height == 0 || width == 0 {
            return Err(Error::invalid(format!(
                "image dimensions must be positive, got {height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::shape(format!(
                "data length {} does not match {channels}x{height}x{width}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image data".into()));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    /// # Panics
    /// Panics on an invalid shape (channels not in {1, 3} or a zero dimension).
    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::filled(channels, height, width, 0.0)
    }

    /// # Panics
    /// Panics on an invalid shape or a non-finite fill value.
    pub fn filled(channels: usize, height: usize, width: usize, value: f64) -> Self {
        Self::new(channels, height, width, vec![value; channels * height * width])
            .expect("invalid image shape")
    }

    /// Builds an image from `f(channel, row, col)`.
    ///
    /// # Panics
    /// Panics on an invalid shape or when `f` returns a non-finite value.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for i in 0..height {
                for j in 0..width {
                    data.push(f(c, i, j));
                }
            }
        }
        Self::new(channels, height, width, data).expect("invalid image")
    }

    /// Assembles an image from equally sized single planes.
    pub fn from_planes(height: usize, width: usize, planes: Vec<Vec<f64>>) -> Result<Self> {
        let channels = planes.len();
        let data = planes.into_iter().flatten().collect();
        Self::new(channels, height, width, data)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn plane_len(&self) -> usize {
        self.height * self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.plane_len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn planes(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.plane_len())
    }

    #[inline]
    pub fn get(&self, c: usize, i: usize, j: usize) -> f64 {
        self.data[(c * self.height + i) * self.width + j]
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.shape() == other.shape()
    }

    pub(crate) fn check_same_shape(&self, other: &Image, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::shape(format!(
                "{what}: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )))
        }
    }

    /// Applies `f` to every plane independently, producing planes of a new size.
    pub(crate) fn map_planes(
        &self,
        height: usize,
        width: usize,
        mut f: impl FnMut(&[f64]) -> Vec<f64>,
    ) -> Result<Image> {
        let planes = self.planes().map(&mut f).collect();
        Image::from_planes(height, width, planes)
    }

    /// Per-sample map. The result is validated for finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Image> {
        Image::new(
            self.channels,
            self.height,
            self.width,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Image> {
        self.check_same_shape(other, "zip_map")?;
        Image::new(
            self.channels,
            self.height,
            self.width,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Image) -> Result<Image> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Image) -> Result<Image> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, k: f64) -> Result<Image> {
        self.map(|v| v * k)
    }

    /// Euclidean inner product over all samples.
    pub fn dot(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other, "dot")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Image) -> Result<f64> {
        self.check_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Crops rows `[0, height)` and columns `[0, width)` from every plane.
    pub fn crop(&self, height: usize, width: usize) -> Result<Image> {
        if height > self.height || width > self.width {
            return Err(Error::shape(format!(
                "crop {height}x{width} exceeds {}x{}",
                self.height, self.width
            )));
        }
        let src_w = self.width;
        self.map_planes(height, width, |p| {
            (0..height)
                .flat_map(|i| p[i * src_w..i * src_w + width].iter().copied())
                .collect()
        })
    }

    /// Circular extension to `height` x `width` (both at least the current size).
    pub fn pad_circular(&self, height: usize, width: usize) -> Result<Image> {
        if height < self.height || width < self.width {
            return Err(Error::shape("pad target smaller than image"));
        }
        let (h, w) = (self.height, self.width);
        self.map_planes(height, width, |p| {
            let mut out = Vec::with_capacity(height * width);
            for i in 0..height {
                for j in 0..width {
                    out.push(p[(i % h) * w + j % w]);
                }
            }
            out
        })
    }

    /// Luma conversion for 3-channel images (ITU-R BT.601 weights); gray
    /// images are returned unchanged.
    pub fn to_gray(&self) -> Image {
        if self.channels == 1 {
            return self.clone();
        }
        let n = self.plane_len();
        let data = (0..n)
            .map(|k| {
                0.299 * self.data[k] + 0.587 * self.data[n + k] + 0.114 * self.data[2 * n + k]
            })
            .collect();
        Image::new(1, self.height, self.width, data).expect("gray conversion")
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
