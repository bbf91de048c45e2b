//! Denoiser priors: the plug-in interface, classical built-ins, and the
//! out-of-process PPDN/1 bridge.

mod dct;
mod external;
mod median;
pub mod protocol;
mod tv;

use std::fmt;
use std::io::{Read, Write};
use std::time::Duration;

pub use dct::{dct_denoise_plane, dct_threshold_denoise};
pub use external::{ExternalDenoiser, DEFAULT_TIMEOUT};
pub use median::median3x3;
pub use tv::{tv_iso, tv_prox, tv_prox_plane, TV_MAX_ITERS, TV_STEP, TV_TOL};

use crate::error::{Error, Result};
use crate::tensor::Image;

/// Non-blind Gaussian denoiser. `sigma255` is the noise level on the 0–255
/// scale; implementations must preserve the image shape.
pub trait Denoiser {
    fn denoise(&mut self, img: &Image, sigma255: f64) -> Result<Image>;

    /// Short identifier recorded in run reports.
    fn name(&self) -> String;
}

/// Configured denoiser backend.
#[derive(Debug)]
pub enum DenoiserHandle {
    Identity,
    /// TV prox with weight `kappa · (σ/255)²`.
    Tv { kappa: f64 },
    Dct,
    Median,
    External(ExternalDenoiser),
}

impl DenoiserHandle {
    pub fn tv() -> Self {
        DenoiserHandle::Tv { kappa: 1.0 }
    }

    /// Parses `identity`, `tv`, `tv:<kappa>`, `dct`, `median` or
    /// `extern:<command line>` (whitespace-split, no shell quoting).
    pub fn from_spec(spec: &str, timeout: Duration) -> Result<Self> {
        let spec = spec.trim();
        if let Some(cmd) = spec.strip_prefix("extern:") {
            let parts: Vec<String> = cmd.split_whitespace().map(str::to_owned).collect();
            return Ok(DenoiserHandle::External(ExternalDenoiser::spawn(&parts, timeout)?));
        }
        if let Some(k) = spec.strip_prefix("tv:") {
            let kappa: f64 = k
                .parse()
                .map_err(|_| Error::invalid(format!("bad tv weight factor {k:?}")))?;
            if !(kappa >= 0.0 && kappa.is_finite()) {
                return Err(Error::invalid("tv weight factor must be >= 0"));
            }
            return Ok(DenoiserHandle::Tv { kappa });
        }
        match spec {
            "identity" | "none" => Ok(DenoiserHandle::Identity),
            "tv" => Ok(DenoiserHandle::tv()),
            "dct" => Ok(DenoiserHandle::Dct),
            "median" => Ok(DenoiserHandle::Median),
            other => Err(Error::invalid(format!("unknown denoiser {other:?}"))),
        }
    }

    pub fn is_deterministic(&self) -> bool {
        !matches!(self, DenoiserHandle::External(_))
    }
}

impl Denoiser for DenoiserHandle {
    fn denoise(&mut self, img: &Image, sigma255: f64) -> Result<Image> {
        if !(sigma255 >= 0.0 && sigma255.is_finite()) {
            return Err(Error::invalid(format!("noise level must be >= 0, got {sigma255}")));
        }
        if let DenoiserHandle::External(ext) = self {
            let out = ext.denoise(img, sigma255)?;
            if !out.is_finite() {
                return Err(Error::NonFinite("external denoiser output".into()));
            }
            return Ok(out);
        }
        if sigma255 == 0.0 {
            return Ok(img.clone());
        }
        let sigma = sigma255 / 255.0;
        Ok(match self {
            DenoiserHandle::Identity => img.clone(),
            DenoiserHandle::Tv { kappa } => tv_prox(img, *kappa * sigma * sigma),
            DenoiserHandle::Dct => dct_threshold_denoise(img, sigma),
            DenoiserHandle::Median => median3x3(img),
            DenoiserHandle::External(_) => unreachable!(),
        })
    }

    fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for DenoiserHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenoiserHandle::Identity => f.write_str("identity"),
            DenoiserHandle::Tv { kappa } if *kappa == 1.0 => f.write_str("tv"),
            DenoiserHandle::Tv { kappa } => write!(f, "tv:{kappa}"),
            DenoiserHandle::Dct => f.write_str("dct"),
            DenoiserHandle::Median => f.write_str("median"),
            DenoiserHandle::External(e) => write!(f, "extern:{}", e.command().join(" ")),
        }
    }
}

/// Status sent when the denoiser itself fails.
pub const STATUS_DENOISER_FAILED: u32 = 1;
/// Status sent before giving up on a malformed request.
pub const STATUS_MALFORMED: u32 = 2;

/// Serves PPDN/1 requests from `input` with `denoiser` until end of stream.
/// Failing requests get an error response. A malformed request gets one too,
/// then ends the loop since the stream can no longer be framed.
pub fn serve(
    denoiser: &mut dyn Denoiser,
    input: &mut impl Read,
    output: &mut impl Write,
) -> std::result::Result<usize, protocol::ProtocolError> {
    let mut served = 0;
    loop {
        let frame = match protocol::read_request(input) {
            Ok(Some(frame)) => frame,
            Ok(None) => break,
            Err(protocol::ProtocolError::Malformed(msg)) => {
                protocol::write_response_error(output, STATUS_MALFORMED, &msg)?;
                return Err(protocol::ProtocolError::Malformed(msg));
            }
            Err(e) => return Err(e),
        };
        let sigma255 = frame.sigma as f64 * 255.0;
        match denoiser.denoise(&frame.image, sigma255) {
            Ok(out) => protocol::write_response_ok(output, frame.sigma, &out)?,
            Err(e) => {
                protocol::write_response_error(output, STATUS_DENOISER_FAILED, &e.to_string())?
            }
        }
        served += 1;
    }
    Ok(served)
}
