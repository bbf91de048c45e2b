use std::path::PathBuf;

use serde::Serialize;

use pnp_restore::schedule::HqsSchedule;
use pnp_restore::solver::IterationTrace;

/// Everything needed to reproduce and audit one restoration.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub engine_version: &'static str,
    pub task: String,
    pub input: PathBuf,
    pub output: PathBuf,
    pub kernel: Option<KernelRef>,
    pub scale: usize,
    pub pattern: Option<String>,
    pub ground_truth: Option<PathBuf>,
    /// Observation noise level, 0–255 scale.
    pub sigma: f64,
    pub schedule: ScheduleReport,
    pub solver: String,
    pub ibp: Option<IbpReport>,
    pub ensemble: bool,
    pub denoiser: String,
    pub stop_tol: Option<f64>,
    pub seed: Option<u64>,
    /// PSNR of the initial estimate; `null` when infinite or without ground truth.
    pub initial_psnr: Option<f64>,
    pub final_psnr: Option<f64>,
    pub iterations_run: usize,
    pub wall_time: f64,
    pub trace: Vec<IterationTrace>,
}

#[derive(Debug, Serialize, Clone)]
pub struct KernelRef {
    pub path: PathBuf,
    pub sha256: String,
    pub height: usize,
    pub width: usize,
}

#[derive(Debug, Serialize)]
pub struct ScheduleReport {
    pub iterations: usize,
    pub sigma1: f64,
    #[serde(rename = "sigmaK")]
    pub sigma_k: f64,
    pub lambda: f64,
    pub sigma_data: f64,
    pub sigmas: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl From<&HqsSchedule> for ScheduleReport {
    fn from(s: &HqsSchedule) -> Self {
        Self {
            iterations: s.len(),
            sigma1: s.sigma1(),
            sigma_k: s.sigma_k(),
            lambda: s.lambda(),
            sigma_data: s.sigma_data(),
            sigmas: s.sigmas().to_vec(),
            alphas: s.alphas().to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct IbpReport {
    pub gamma: f64,
    pub inner_iters: usize,
}

/// Sidecar written next to a synthesized observation.
#[derive(Debug, Serialize)]
pub struct DegradeSidecar {
    pub engine_version: &'static str,
    pub task: String,
    pub ground_truth: PathBuf,
    pub output: PathBuf,
    pub kernel: Option<KernelRef>,
    pub scale: usize,
    pub pattern: Option<String>,
    pub sigma: f64,
    pub seed: u64,
    pub shape: [usize; 3],
}
