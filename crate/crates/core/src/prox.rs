//! Data-subproblem solvers:
//! `x = argmin_x ‖y − T(x)‖² + α‖x − z‖²` for each supported degradation.
//!
//! Everything that depends only on the observation and the operator is
//! computed once when the solver is built; [`DataProx::solve`] is then called
//! once per outer iteration with a new anchor `z` and weight `α`.

use num_complex::Complex64;

use crate::degrade::{
    bicubic_equivalent_taps, bicubic_resize, cfa_mask, forward, zerofill_upsample, BlurKernel,
    Task,
};
use crate::error::{Error, Result};
use crate::freq::{
    apply_otf, block_downsample_spectrum, block_multiply_spectrum, fft2, fft2_image, ifft2_real,
    psf2otf, psf2otf_taps, Spectrum,
};
use crate::tensor::Image;

/// Step size of iterative back-projection.
pub const DEFAULT_IBP_GAMMA: f64 = 1.75;
/// Back-projection steps per outer iteration.
pub const DEFAULT_IBP_ITERS: usize = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverChoice {
    /// Exact minimizer (FFT or element-wise closed form).
    #[default]
    Closed,
    /// Iterative back-projection, super-resolution only.
    Ibp,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IbpParams {
    pub gamma: f64,
    pub inner_iters: usize,
}

impl Default for IbpParams {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_IBP_GAMMA,
            inner_iters: DEFAULT_IBP_ITERS,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must be positive, got {alpha}")))
    }
}

/// FFT closed form for circular deconvolution.
#[derive(Clone, Debug)]
pub struct DeblurProx {
    shape: (usize, usize, usize),
    abs2: Spectrum,
    /// `conj(F(k)) · F(y)` per channel.
    kty: Vec<Spectrum>,
}

impl DeblurProx {
    pub fn new(kernel: &BlurKernel, y: &Image) -> Result<Self> {
        let otf = psf2otf(kernel, y.height(), y.width())?;
        let conj = otf.conj();
        let abs2 = otf.map(|v| Complex64::new(v.norm_sqr(), 0.0));
        let kty = fft2_image(y)
            .iter()
            .map(|fy| conj.mul(fy))
            .collect::<Result<_>>()?;
        Ok(Self {
            shape: y.shape(),
            abs2,
            kty,
        })
    }

    pub fn solve(&self, z: &Image, alpha: f64) -> Result<Image> {
        check_alpha(alpha)?;
        if z.shape() != self.shape {
            return Err(Error::shape(format!(
                "anchor {:?} vs observation {:?}",
                z.shape(),
                self.shape
            )));
        }
        let (_, h, w) = self.shape;
        let planes = z
            .planes()
            .zip(&self.kty)
            .map(|(zp, kty)| {
                let fz = fft2(h, w, zp);
                let num = kty.zip_map(&fz, |a, b| a + alpha * b)?;
                let x = num.zip_map(&self.abs2, |n, d| n / (d.re + alpha))?;
                Ok(ifft2_real(&x))
            })
            .collect::<Result<Vec<_>>>()?;
        Image::from_planes(h, w, planes)
    }
}

/// FFT closed form for `y = (x ⊗ k)↓s`, using the distinct-block operators.
#[derive(Clone, Debug)]
pub struct SisrClosedProx {
    scale: usize,
    hr_shape: (usize, usize, usize),
    otf: Spectrum,
    otf_conj: Spectrum,
    /// `(|F(k)|²)⇓s`, low-resolution sized.
    abs2_down: Spectrum,
    /// `conj(F(k)) · F(y↑s)` per channel.
    kty: Vec<Spectrum>,
}

impl SisrClosedProx {
    pub fn new(kernel: &BlurKernel, y: &Image, scale: usize) -> Result<Self> {
        let (_, h, w) = y.shape();
        let otf = psf2otf(kernel, h * scale, w * scale)?;
        Self::with_otf(otf, y, scale)
    }

    /// Closed form for bicubic degradation, using the blur kernel that makes
    /// `(x ⊗ k)↓s` match bicubic downscaling away from the borders.
    pub fn bicubic(y: &Image, scale: usize) -> Result<Self> {
        let (n, taps) = bicubic_equivalent_taps(scale);
        let otf = psf2otf_taps(n, n, &taps, y.height() * scale, y.width() * scale)?;
        Self::with_otf(otf, y, scale)
    }

    fn with_otf(otf: Spectrum, y: &Image, scale: usize) -> Result<Self> {
        if scale == 0 {
            return Err(Error::invalid("scale must be positive"));
        }
        let otf_conj = otf.conj();
        let abs2 = otf.map(|v| Complex64::new(v.norm_sqr(), 0.0));
        let abs2_down = block_downsample_spectrum(&abs2, scale)?;
        let up = zerofill_upsample(y, scale)?;
        let kty = fft2_image(&up)
            .iter()
            .map(|f| otf_conj.mul(f))
            .collect::<Result<_>>()?;
        Ok(Self {
            scale,
            hr_shape: up.shape(),
            otf,
            otf_conj,
            abs2_down,
            kty,
        })
    }

    pub fn solve(&self, z: &Image, alpha: f64) -> Result<Image> {
        check_alpha(alpha)?;
        if z.shape() != self.hr_shape {
            return Err(Error::shape(format!(
                "anchor {:?} vs high-resolution frame {:?}",
                z.shape(),
                self.hr_shape
            )));
        }
        let (_, h, w) = self.hr_shape;
        let s = self.scale;
        let planes = z
            .planes()
            .zip(&self.kty)
            .map(|(zp, kty)| {
                let fz = fft2(h, w, zp);
                let d = kty.zip_map(&fz, |a, b| a + alpha * b)?;
                let kd = block_downsample_spectrum(&self.otf.mul(&d)?, s)?;
                let frac = kd.zip_map(&self.abs2_down, |n, a| n / (a.re + alpha))?;
                let back = block_multiply_spectrum(&self.otf_conj, &frac, s)?;
                let x = d.zip_map(&back, |d, b| (d - b) / alpha)?;
                Ok(ifft2_real(&x))
            })
            .collect::<Result<Vec<_>>>()?;
        Image::from_planes(h, w, planes)
    }
}

/// Degradation used by back-projection.
#[derive(Clone, Debug)]
pub enum IbpOperator {
    /// Blur then s-fold decimation; the back-projection uses the exact adjoint.
    Kernel(BlurKernel),
    /// Bicubic downscaling, back-projected with bicubic upscaling.
    Bicubic,
}

/// Iterative back-projection starting from the anchor. `alpha` plays no
/// role: the anchor only enters as the starting point.
#[derive(Clone, Debug)]
pub struct IbpProx {
    y: Image,
    scale: usize,
    op: IbpOperator,
    otf: Option<Spectrum>,
    params: IbpParams,
}

impl IbpProx {
    pub fn new(y: &Image, scale: usize, op: IbpOperator, params: IbpParams) -> Result<Self> {
        if scale == 0 {
            return Err(Error::invalid("scale must be positive"));
        }
        if !(params.gamma >= 0.0 && params.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be >= 0, got {}", params.gamma)));
        }
        if params.inner_iters == 0 {
            return Err(Error::invalid("IBP needs at least one inner iteration"));
        }
        let otf = match &op {
            IbpOperator::Kernel(k) => Some(psf2otf(k, y.height() * scale, y.width() * scale)?),
            IbpOperator::Bicubic => None,
        };
        Ok(Self {
            y: y.clone(),
            scale,
            op,
            otf,
            params,
        })
    }

    fn degrade(&self, x: &Image) -> Result<Image> {
        match (&self.op, &self.otf) {
            (IbpOperator::Kernel(_), Some(otf)) => {
                crate::degrade::sfold_downsample(&apply_otf(x, otf)?, self.scale)
            }
            _ => bicubic_resize(x, 1.0 / self.scale as f64),
        }
    }

    fn back_project(&self, residual: &Image) -> Result<Image> {
        match (&self.op, &self.otf) {
            (IbpOperator::Kernel(_), Some(otf)) => {
                let up = zerofill_upsample(residual, self.scale)?;
                apply_otf(&up, &otf.conj())
            }
            _ => bicubic_resize(residual, self.scale as f64),
        }
    }

    pub fn solve(&self, z: &Image) -> Result<Image> {
        let mut x = z.clone();
        if self.params.gamma == 0.0 {
            return Ok(x);
        }
        for _ in 0..self.params.inner_iters {
            let residual = self.y.sub(&self.degrade(&x)?)?;
            let correction = self.back_project(&residual)?;
            x = x.zip_map(&correction, |v, c| v + self.params.gamma * c)?;
        }
        Ok(x)
    }
}

/// Element-wise closed form for CFA masking.
#[derive(Clone, Debug)]
pub struct DemosaicProx {
    mask: Image,
    masked_y: Image,
}

impl DemosaicProx {
    pub fn new(mask: &Image, y: &Image) -> Result<Self> {
        mask.check_same_shape(y, "mask vs observation")?;
        if mask.data().iter().any(|&m| m != 0.0 && m != 1.0) {
            return Err(Error::invalid("mask must be binary"));
        }
        Ok(Self {
            mask: mask.clone(),
            masked_y: mask.zip_map(y, |m, v| m * v)?,
        })
    }

    pub fn solve(&self, z: &Image, alpha: f64) -> Result<Image> {
        check_alpha(alpha)?;
        z.check_same_shape(&self.mask, "anchor vs mask")?;
        let (c, h, w) = z.shape();
        let data = self
            .masked_y
            .data()
            .iter()
            .zip(self.mask.data())
            .zip(z.data())
            .map(|((my, m), zv)| (my + alpha * zv) / (m + alpha))
            .collect();
        Image::new(c, h, w, data)
    }
}

#[derive(Clone, Debug)]
enum Solver {
    Deblur(DeblurProx),
    SisrClosed(SisrClosedProx),
    Ibp(IbpProx),
    Demosaic(DemosaicProx),
}

/// Data-proximal solver bound to one observation.
#[derive(Clone, Debug)]
pub struct DataProx {
    task: Task,
    y: Image,
    solver: Solver,
}

impl DataProx {
    pub fn new(task: &Task, y: &Image, choice: SolverChoice, ibp: IbpParams) -> Result<Self> {
        let solver = match (task, choice) {
            (Task::Deblur { kernel }, _) => Solver::Deblur(DeblurProx::new(kernel, y)?),
            (Task::ClassicalSr { scale, kernel }, SolverChoice::Closed) => {
                Solver::SisrClosed(SisrClosedProx::new(kernel, y, *scale)?)
            }
            (Task::ClassicalSr { scale, kernel }, SolverChoice::Ibp) => Solver::Ibp(IbpProx::new(
                y,
                *scale,
                IbpOperator::Kernel(kernel.clone()),
                ibp,
            )?),
            (Task::BicubicSr { scale }, SolverChoice::Closed) => {
                Solver::SisrClosed(SisrClosedProx::bicubic(y, *scale)?)
            }
            (Task::BicubicSr { scale }, SolverChoice::Ibp) => {
                Solver::Ibp(IbpProx::new(y, *scale, IbpOperator::Bicubic, ibp)?)
            }
            (Task::Demosaic { pattern }, _) => {
                if y.channels() != 3 {
                    return Err(Error::shape("demosaicing needs a 3-channel observation"));
                }
                let mask = cfa_mask(*pattern, y.height(), y.width());
                Solver::Demosaic(DemosaicProx::new(&mask, y)?)
            }
        };
        Ok(Self {
            task: task.clone(),
            y: y.clone(),
            solver,
        })
    }

    pub fn task(&self) -> &Task {
        &self.task
    }

    pub fn observation(&self) -> &Image {
        &self.y
    }

    pub fn solve(&self, z: &Image, alpha: f64) -> Result<Image> {
        match &self.solver {
            Solver::Deblur(p) => p.solve(z, alpha),
            Solver::SisrClosed(p) => p.solve(z, alpha),
            Solver::Ibp(p) => p.solve(z),
            Solver::Demosaic(p) => p.solve(z, alpha),
        }
    }

    /// `‖y − T(x)‖²`.
    pub fn data_fidelity(&self, x: &Image) -> Result<f64> {
        Ok(self.y.sub(&forward(x, &self.task)?)?.norm_sq())
    }
}

/// One-shot deblurring prox.
pub fn deblur_prox(kernel: &BlurKernel, y: &Image, z: &Image, alpha: f64) -> Result<Image> {
    DeblurProx::new(kernel, y)?.solve(z, alpha)
}

/// One-shot closed-form super-resolution prox.
pub fn sisr_prox_closed(
    kernel: &BlurKernel,
    y: &Image,
    z: &Image,
    alpha: f64,
    scale: usize,
) -> Result<Image> {
    SisrClosedProx::new(kernel, y, scale)?.solve(z, alpha)
}

/// One-shot back-projection.
pub fn sisr_prox_ibp(
    y: &Image,
    z: &Image,
    scale: usize,
    op: IbpOperator,
    params: IbpParams,
) -> Result<Image> {
    IbpProx::new(y, scale, op, params)?.solve(z)
}

/// One-shot demosaicing prox.
pub fn demosaic_prox(mask: &Image, y: &Image, z: &Image, alpha: f64) -> Result<Image> {
    DemosaicProx::new(mask, y)?.solve(z, alpha)
}
