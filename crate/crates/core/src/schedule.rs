//! Per-iteration denoiser noise levels and data-term weights.

use crate::error::{Error, Result};

/// Smallest data noise level (0–255 scale) used when forming the weights,
/// so that noiseless problems still get positive `alpha` values.
pub const SIGMA_DATA_FLOOR: f64 = 0.255;

/// Default trade-off between data fidelity and prior.
pub const DEFAULT_LAMBDA: f64 = 0.23;

/// Default starting denoiser noise level.
pub const DEFAULT_SIGMA1: f64 = 49.0;

/// Noise levels `sigmas[k]` (0–255 scale, log-spaced and inclusive of both
/// endpoints) and the matching data weights `alphas[k] = λσ²/σ_k²`.
#[derive(Clone, Debug, PartialEq)]
pub struct HqsSchedule {
    iterations: usize,
    sigma1: f64,
    sigma_k: f64,
    lambda: f64,
    sigma_data: f64,
    sigmas: Vec<f64>,
    alphas: Vec<f64>,
}

impl HqsSchedule {
    pub fn build(
        iterations: usize,
        sigma1: f64,
        sigma_k: f64,
        lambda: f64,
        sigma_data: f64,
    ) -> Result<Self> {
        if iterations == 0 {
            return Err(Error::invalid("iteration count must be at least 1"));
        }
        if !(sigma_k > 0.0 && sigma1 >= sigma_k && sigma1.is_finite()) {
            return Err(Error::invalid(format!(
                "need sigma1 >= sigmaK > 0, got sigma1={sigma1}, sigmaK={sigma_k}"
            )));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {lambda}")));
        }
        if !(sigma_data >= 0.0 && sigma_data.is_finite()) {
            return Err(Error::invalid(format!(
                "data noise level must be >= 0, got {sigma_data}"
            )));
        }

        let sigmas: Vec<f64> = if iterations == 1 {
            vec![sigma_k]
        } else {
            let ratio = sigma_k / sigma1;
            let last = (iterations - 1) as f64;
            (0..iterations)
                .map(|k| match k {
                    0 => sigma1,
                    k if k == iterations - 1 => sigma_k,
                    k => sigma1 * ratio.powf(k as f64 / last),
                })
                .collect()
        };

        let sd = sigma_data.max(SIGMA_DATA_FLOOR) / 255.0;
        let alphas = sigmas
            .iter()
            .map(|s| {
                let sk = s / 255.0;
                lambda * sd * sd / (sk * sk)
            })
            .collect();

        Ok(Self {
            iterations,
            sigma1,
            sigma_k,
            lambda,
            sigma_data,
            sigmas,
            alphas,
        })
    }

    pub fn len(&self) -> usize {
        self.iterations
    }

    pub fn is_empty(&self) -> bool {
        self.iterations == 0
    }

    pub fn sigma1(&self) -> f64 {
        self.sigma1
    }

    pub fn sigma_k(&self) -> f64 {
        self.sigma_k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn sigma_data(&self) -> f64 {
        self.sigma_data
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// `(sigma_k, alpha_k)` pairs in iteration order.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.sigmas.iter().copied().zip(self.alphas.iter().copied())
    }
}
