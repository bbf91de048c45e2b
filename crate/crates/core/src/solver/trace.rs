use std::fmt::Write as _;

use serde::Serialize;

pub const TRACE_CSV_HEADER: &str = "iter,sigma_k,alpha_k,psnr_x,psnr_z,data_fidelity,wall_time";

/// One outer iteration. `k` starts at 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationTrace {
    pub k: usize,
    pub sigma_k: f64,
    pub alpha_k: f64,
    pub psnr_x: Option<f64>,
    pub psnr_z: Option<f64>,
    /// `‖y − T(x_k)‖²`
    pub data_fidelity: f64,
    /// Seconds since the run started.
    pub wall_time: f64,
}

impl IterationTrace {
    /// Equality ignoring wall-clock time.
    pub fn same_values(&self, other: &IterationTrace) -> bool {
        let bits = |v: Option<f64>| v.map(f64::to_bits);
        self.k == other.k
            && self.sigma_k.to_bits() == other.sigma_k.to_bits()
            && self.alpha_k.to_bits() == other.alpha_k.to_bits()
            && bits(self.psnr_x) == bits(other.psnr_x)
            && bits(self.psnr_z) == bits(other.psnr_z)
            && self.data_fidelity.to_bits() == other.data_fidelity.to_bits()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

pub fn trace_csv(trace: &[IterationTrace]) -> String {
    let mut out = String::from(TRACE_CSV_HEADER);
    out.push('\n');
    for r in trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.k,
            r.sigma_k,
            r.alpha_k,
            opt(r.psnr_x),
            opt(r.psnr_z),
            r.data_fidelity,
            r.wall_time
        );
    }
    out
}
