//! Analysis helpers: residual histograms, (K, σ1) sweeps and per-iteration
//! image dumps.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::schedule::HqsSchedule;
use crate::solver::{run, run_observed, Restoration, RestorationJob, RunError};
use crate::tensor::{psnr, write_png, Image};

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.bin_edges[i], self.bin_edges[i + 1], c);
        }
        out
    }
}

/// Histogram of `x − gt` over the symmetric range `[−m, m]`, with `m` the
/// largest absolute difference. When all differences are zero every sample
/// falls into bin `bins / 2`.
pub fn residual_histogram(x: &Image, gt: &Image, bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::invalid("need at least two bins"));
    }
    let diff = x.sub(gt)?;
    let m = diff.data().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let half = if m > 0.0 { m } else { 1.0 };
    let width = 2.0 * half / bins as f64;
    let bin_edges = (0..=bins).map(|i| -half + i as f64 * width).collect();
    let mut counts = vec![0u64; bins];
    for &v in diff.data() {
        let idx = (((v + half) / width).floor() as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Ok(Histogram {
        bin_edges,
        counts,
        total: diff.len() as u64,
    })
}

/// Final PSNR for every `(K, σ1)` pair; rows follow `ks`, columns `sigma1s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub ks: Vec<usize>,
    pub sigma1s: Vec<f64>,
    pub psnr: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn get(&self, k: usize, sigma1: f64) -> Option<f64> {
        let r = self.ks.iter().position(|&v| v == k)?;
        let c = self.sigma1s.iter().position(|&v| v == sigma1)?;
        Some(self.psnr[r][c])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("K");
        for s in &self.sigma1s {
            let _ = write!(out, ",sigma1={s}");
        }
        out.push('\n');
        for (k, row) in self.ks.iter().zip(&self.psnr) {
            let _ = write!(out, "{k}");
            for v in row {
                let _ = write!(out, ",{v:.4}");
            }
            out.push('\n');
        }
        out
    }
}

pub type DenoiserFactory<'a> = dyn Fn() -> Result<Box<dyn Denoiser + Send>> + Sync + 'a;

fn sweep_cell(
    template: &RestorationJob,
    k: usize,
    sigma1: f64,
    make_denoiser: &DenoiserFactory<'_>,
) -> Result<f64> {
    let gt = template
        .ground_truth
        .as_ref()
        .ok_or_else(|| Error::invalid("sweeping needs a ground-truth image"))?;
    let s = &template.schedule;
    let mut job = template.clone();
    job.schedule = HqsSchedule::build(k, sigma1, s.sigma_k(), s.lambda(), s.sigma_data())?;
    let mut denoiser = make_denoiser()?;
    let out = run(&job, denoiser.as_mut()).map_err(|e| e.source)?;
    psnr(&out.image, gt, 0)
}

/// Runs the template once per grid cell, replacing only the schedule's
/// iteration count and starting noise level. Each cell gets its own denoiser.
pub fn sweep(
    template: &RestorationJob,
    ks: &[usize],
    sigma1s: &[f64],
    make_denoiser: &DenoiserFactory<'_>,
    parallel: bool,
) -> Result<SweepTable> {
    let cells: Vec<(usize, f64)> = ks
        .iter()
        .flat_map(|&k| sigma1s.iter().map(move |&s| (k, s)))
        .collect();
    let values: Vec<f64> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cells
                .iter()
                .map(|&(k, s)| scope.spawn(move || sweep_cell(template, k, s, make_denoiser)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect::<Result<_>>()
        })?
    } else {
        cells
            .iter()
            .map(|&(k, s)| sweep_cell(template, k, s, make_denoiser))
            .collect::<Result<_>>()?
    };
    Ok(SweepTable {
        ks: ks.to_vec(),
        sigma1s: sigma1s.to_vec(),
        psnr: values.chunks(sigma1s.len().max(1)).map(<[f64]>::to_vec).collect(),
    })
}

pub fn intermediate_path(dir: &Path, role: &str, k: usize) -> PathBuf {
    dir.join(format!("{role}_{k:03}.png"))
}

/// Runs the job and writes `x_kkk.png` / `z_kkk.png` for every requested
/// iteration. Returns the restoration and the files written.
pub fn dump_intermediates(
    job: &RestorationJob,
    denoiser: &mut dyn Denoiser,
    ks: &BTreeSet<usize>,
    dir: &Path,
) -> Result<(Restoration, Vec<PathBuf>), RunError> {
    let mut written = Vec::new();
    let mut io_error: Option<Error> = None;
    let out = run_observed(job, denoiser, &mut |state| {
        if io_error.is_some() || !ks.contains(&state.record.k) {
            return;
        }
        for (role, img) in [("x", state.x), ("z", state.z)] {
            let path = intermediate_path(dir, role, state.record.k);
            match write_png(&path, img) {
                Ok(()) => written.push(path),
                Err(e) => {
                    io_error = Some(e);
                    return;
                }
            }
        }
    })?;
    if let Some(source) = io_error {
        return Err(RunError {
            source,
            trace: out.trace,
        });
    }
    Ok((out, written))
}
