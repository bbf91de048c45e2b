use std::collections::BTreeSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use sha2::{Digest, Sha256};

use pnp_restore::degrade::{apply_degradation, cfa_mask, mosaic, CfaPattern, DegradationSpec, Task};
use pnp_restore::denoise::{self, Denoiser, DenoiserHandle};
use pnp_restore::diagnostics::{self, dump_intermediates, residual_histogram};
use pnp_restore::kernel::BlurKernel;
use pnp_restore::prox::{IbpParams, SolverChoice};
use pnp_restore::schedule::{HqsSchedule, DEFAULT_LAMBDA, DEFAULT_SIGMA1};
use pnp_restore::solver::{default_tv_kappa, run, trace_csv, RestorationJob, Restoration};
use pnp_restore::tensor::{psnr as psnr_db, read_png, write_png, Image};

use crate::args::*;
use crate::failure::{CliResult, Failure};
use crate::report::{DegradeSidecar, IbpReport, KernelRef, RunReport, ScheduleReport};

fn load_kernel(path: &Path) -> CliResult<(BlurKernel, KernelRef)> {
    let bytes = fs::read(path).map_err(|e| Failure::io(path.display(), e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Failure::from(pnp_restore::Error::KernelFormat("not UTF-8".into())))?;
    let kernel = BlurKernel::parse(&text).map_err(|e| Failure::from(e).context(path.display()))?;
    let reference = KernelRef {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        height: kernel.height(),
        width: kernel.width(),
    };
    Ok((kernel, reference))
}

fn load_image(path: &Path) -> CliResult<Image> {
    read_png(path).map_err(|e| Failure::from(e).context(path.display()))
}

fn save_image(path: &Path, img: &Image) -> CliResult {
    write_png(path, img).map_err(|e| Failure::from(e).context(path.display()))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::io(path.display(), e))
}

fn parse_pattern(s: &str) -> CliResult<CfaPattern> {
    s.parse::<CfaPattern>().map_err(Failure::from)
}

fn check_sigma(sigma: f64) -> CliResult {
    if (0.0..=255.0).contains(&sigma) {
        Ok(())
    } else {
        Err(Failure::usage(format!("--sigma must lie in [0, 255], got {sigma}")))
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// Builds the task from `--task/--kernel/--scale/--pattern`.
fn task_from_args(a: &TaskArgs) -> CliResult<(Task, Option<KernelRef>)> {
    let kernel = a.kernel.as_deref().map(load_kernel).transpose()?;
    let scale = |name: &str| -> CliResult<usize> {
        match a.scale {
            Some(s) if s >= 1 => Ok(s),
            Some(_) => Err(Failure::usage("--scale must be at least 1")),
            None => Err(Failure::usage(format!("--task {name} needs --scale"))),
        }
    };
    let no_kernel = |name: &str| -> CliResult {
        if kernel.is_some() {
            Err(Failure::usage(format!("--task {name} takes no --kernel")))
        } else {
            Ok(())
        }
    };
    Ok(match a.task {
        TaskKind::Deblur => {
            let (k, r) = kernel.ok_or_else(|| Failure::usage("--task deblur needs --kernel"))?;
            (Task::Deblur { kernel: k }, Some(r))
        }
        TaskKind::Sr => {
            let scale = scale("sr")?;
            match kernel {
                Some((k, r)) => (Task::ClassicalSr { scale, kernel: k }, Some(r)),
                None => (
                    Task::ClassicalSr {
                        scale,
                        kernel: BlurKernel::delta(),
                    },
                    None,
                ),
            }
        }
        TaskKind::SrBicubic => {
            no_kernel("sr-bicubic")?;
            (Task::BicubicSr { scale: scale("sr-bicubic")? }, None)
        }
        TaskKind::Demosaic => {
            no_kernel("demosaic")?;
            (
                Task::Demosaic {
                    pattern: parse_pattern(&a.pattern)?,
                },
                None,
            )
        }
    })
}

fn pattern_of(task: &Task) -> Option<String> {
    match task {
        Task::Demosaic { pattern } => Some(pattern.to_string()),
        _ => None,
    }
}

/// Spells out a bare `tv` as the task's default weight.
fn resolve_spec(spec: &str, task: &Task) -> String {
    if spec.trim() == "tv" {
        format!("tv:{}", default_tv_kappa(task))
    } else {
        spec.to_owned()
    }
}

fn make_denoiser(spec: &str, task: &Task, timeout: Duration) -> CliResult<DenoiserHandle> {
    DenoiserHandle::from_spec(&resolve_spec(spec, task), timeout).map_err(Failure::from)
}

pub fn degrade(a: &DegradeArgs) -> CliResult {
    check_sigma(a.sigma)?;
    let (task, kernel) = task_from_args(&a.task)?;
    let x = load_image(&a.input)?;
    let spec = DegradationSpec::new(task, a.sigma);
    let y = apply_degradation(&x, &spec, a.seed)?;
    save_image(&a.output, &y)?;

    let sidecar = DegradeSidecar {
        engine_version: pnp_restore::VERSION,
        task: spec.task.name().to_owned(),
        ground_truth: a.input.clone(),
        output: a.output.clone(),
        kernel,
        scale: spec.task.scale(),
        pattern: pattern_of(&spec.task),
        sigma: a.sigma,
        seed: a.seed,
        shape: [y.channels(), y.height(), y.width()],
    };
    let path = a.sidecar.clone().unwrap_or_else(|| {
        let mut p = a.output.clone().into_os_string();
        p.push(".json");
        PathBuf::from(p)
    });
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    write_text(&path, &(json + "\n"))
}

/// Task-specific settings of one restoration command.
struct RestorePlan {
    task: Task,
    kernel: Option<KernelRef>,
    solver: SolverChoice,
    ibp: IbpParams,
}

pub fn deblur(a: &DeblurArgs) -> CliResult {
    let (kernel, kref) = load_kernel(&a.kernel)?;
    let plan = RestorePlan {
        task: Task::Deblur { kernel },
        kernel: Some(kref),
        solver: SolverChoice::Closed,
        ibp: IbpParams::default(),
    };
    restore(&a.common, &plan)
}

pub fn sr(a: &SrArgs) -> CliResult {
    if a.scale < 1 {
        return Err(Failure::usage("--scale must be at least 1"));
    }
    let (task, kernel) = match &a.kernel {
        Some(path) => {
            let (k, r) = load_kernel(path)?;
            (
                Task::ClassicalSr {
                    scale: a.scale,
                    kernel: k,
                },
                Some(r),
            )
        }
        None => (Task::BicubicSr { scale: a.scale }, None),
    };
    let plan = RestorePlan {
        task,
        kernel,
        solver: match a.solver {
            SolverKind::Closed => SolverChoice::Closed,
            SolverKind::Ibp => SolverChoice::Ibp,
        },
        ibp: IbpParams {
            gamma: a.ibp_gamma,
            inner_iters: a.ibp_iters,
        },
    };
    restore(&a.common, &plan)
}

pub fn demosaic(a: &DemosaicArgs) -> CliResult {
    let plan = RestorePlan {
        task: Task::Demosaic {
            pattern: parse_pattern(&a.pattern)?,
        },
        kernel: None,
        solver: SolverChoice::Closed,
        ibp: IbpParams::default(),
    };
    restore(&a.common, &plan)
}

/// A single-channel raw frame is spread over the three channels of its CFA
/// sites; a three-channel input is re-masked.
fn as_mosaic(y: Image, pattern: CfaPattern) -> CliResult<Image> {
    match y.channels() {
        1 => {
            let (h, w) = (y.height(), y.width());
            let mask = cfa_mask(pattern, h, w);
            let raw = y.plane(0);
            let data = mask
                .data()
                .iter()
                .enumerate()
                .map(|(idx, m)| m * raw[idx % (h * w)])
                .collect();
            Ok(Image::new(3, h, w, data)?)
        }
        3 => Ok(mosaic(&y, pattern)?),
        c => Err(Failure::usage(format!("mosaic must have 1 or 3 channels, got {c}"))),
    }
}

fn build_schedule(a: &RestoreArgs, task: &Task) -> CliResult<HqsSchedule> {
    let (default_iters, default_sigma_k) = pnp_restore::solver::task_defaults(task, a.sigma);
    let sigma_k = a.sigma_k.unwrap_or(default_sigma_k);
    let sigma1 = a.sigma1.unwrap_or(DEFAULT_SIGMA1.max(sigma_k));
    HqsSchedule::build(
        a.iters.unwrap_or(default_iters),
        sigma1,
        sigma_k,
        a.lambda.unwrap_or(DEFAULT_LAMBDA),
        a.sigma,
    )
    .map_err(Failure::from)
}

/// Where the artifacts of one input go.
struct Destinations {
    input: PathBuf,
    output: PathBuf,
    report: Option<PathBuf>,
    trace: Option<PathBuf>,
    dump: Option<PathBuf>,
}

fn destinations(a: &RestoreArgs) -> CliResult<Vec<Destinations>> {
    if a.input.len() == 1 {
        return Ok(vec![Destinations {
            input: a.input[0].clone(),
            output: a.output.clone(),
            report: a.report.clone(),
            trace: a.trace.clone(),
            dump: a.dump.clone(),
        }]);
    }
    if a.gt.is_some() {
        return Err(Failure::usage("--gt needs a single --input"));
    }
    let mut stems = BTreeSet::new();
    let mut out = Vec::with_capacity(a.input.len());
    for input in &a.input {
        let stem = input
            .file_stem()
            .ok_or_else(|| Failure::usage(format!("bad input path {}", input.display())))?
            .to_owned();
        if !stems.insert(stem.clone()) {
            return Err(Failure::usage(format!(
                "inputs share the file name {}",
                stem.to_string_lossy()
            )));
        }
        let file = |dir: &Path, ext: &str| dir.join(Path::new(&stem).with_extension(ext));
        out.push(Destinations {
            input: input.clone(),
            output: file(&a.output, "png"),
            report: a.report.as_deref().map(|d| file(d, "json")),
            trace: a.trace.as_deref().map(|d| file(d, "csv")),
            dump: a.dump.as_deref().map(|d| d.join(&stem)),
        });
    }
    for dir in [Some(&a.output), a.report.as_ref(), a.trace.as_ref()].into_iter().flatten() {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir.display(), e))?;
    }
    Ok(out)
}

fn restore(a: &RestoreArgs, plan: &RestorePlan) -> CliResult {
    check_sigma(a.sigma)?;
    if a.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    let schedule = build_schedule(a, &plan.task)?;
    let gt = a.gt.as_deref().map(load_image).transpose()?;
    let dests = destinations(a)?;

    if dests.len() == 1 {
        return restore_one(a, plan, &schedule, gt, &dests[0]);
    }
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.min(dests.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(d) = dests.get(i) else { break };
                if let Err(f) = restore_one(a, plan, &schedule, None, d) {
                    failures.lock().unwrap().push((i, f));
                }
            });
        }
    });
    let mut failures = failures.into_inner().unwrap();
    failures.sort_by_key(|(i, _)| *i);
    for (i, f) in &failures {
        eprintln!("pnpir: {}: {}", dests[*i].input.display(), f.message);
    }
    match failures.into_iter().next() {
        None => Ok(()),
        Some((i, f)) => Err(f.context(dests[i].input.display())),
    }
}

fn restore_one(
    a: &RestoreArgs,
    plan: &RestorePlan,
    schedule: &HqsSchedule,
    gt: Option<Image>,
    dest: &Destinations,
) -> CliResult {
    let mut y = load_image(&dest.input)?;
    if let Task::Demosaic { pattern } = plan.task {
        y = as_mosaic(y, pattern)?;
    }
    let job = RestorationJob {
        spec: DegradationSpec::new(plan.task.clone(), a.sigma),
        y,
        schedule: schedule.clone(),
        solver: plan.solver,
        ibp: plan.ibp,
        ensemble: !a.no_ensemble,
        ground_truth: gt,
        stop_tol: a.stop_tol,
    };
    let mut denoiser = make_denoiser(
        &a.denoiser,
        &plan.task,
        Duration::from_secs(a.denoiser_timeout),
    )?;

    let result: Restoration = match &dest.dump {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir.display(), e))?;
            let ks: BTreeSet<usize> = if a.dump_iters.is_empty() {
                (1..=schedule.len()).collect()
            } else {
                a.dump_iters.iter().copied().collect()
            };
            dump_intermediates(&job, &mut denoiser, &ks, dir)?.0
        }
        None => run(&job, &mut denoiser)?,
    };
    save_image(&dest.output, &result.image)?;
    if let Some(path) = &dest.trace {
        write_text(path, &trace_csv(&result.trace))?;
    }

    let (initial_psnr, final_psnr) = match &job.ground_truth {
        Some(gt) => (
            finite(psnr_db(&result.initial, gt, 0)?),
            finite(psnr_db(&result.image, gt, 0)?),
        ),
        None => (None, None),
    };
    if let Some(path) = &dest.report {
        let report = RunReport {
            engine_version: pnp_restore::VERSION,
            task: plan.task.name().to_owned(),
            input: dest.input.clone(),
            output: dest.output.clone(),
            kernel: plan.kernel.clone(),
            scale: plan.task.scale(),
            pattern: pattern_of(&plan.task),
            ground_truth: a.gt.clone(),
            sigma: a.sigma,
            schedule: ScheduleReport::from(schedule),
            solver: match plan.solver {
                SolverChoice::Closed => "closed",
                SolverChoice::Ibp => "ibp",
            }
            .to_owned(),
            ibp: (plan.solver == SolverChoice::Ibp).then_some(IbpReport {
                gamma: plan.ibp.gamma,
                inner_iters: plan.ibp.inner_iters,
            }),
            ensemble: job.ensemble,
            denoiser: denoiser.name(),
            stop_tol: a.stop_tol,
            seed: a.seed,
            initial_psnr,
            final_psnr,
            iterations_run: result.trace.len(),
            wall_time: result.wall_time,
            trace: result.trace.clone(),
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        write_text(path, &(json + "\n"))?;
    }

    match (initial_psnr, final_psnr) {
        (Some(i), Some(f)) => println!(
            "{}: {} iterations, {:.2}s, PSNR {i:.2} -> {f:.2} dB",
            dest.output.display(),
            result.trace.len(),
            result.wall_time
        ),
        _ => println!(
            "{}: {} iterations, {:.2}s",
            dest.output.display(),
            result.trace.len(),
            result.wall_time
        ),
    }
    Ok(())
}

pub fn psnr(a: &PsnrArgs) -> CliResult {
    let x = load_image(&a.a)?;
    let y = load_image(&a.b)?;
    let v = psnr_db(&x, &y, a.border)?;
    if v.is_infinite() {
        println!("inf");
    } else {
        println!("{v:.2}");
    }
    Ok(())
}

pub fn histogram(a: &HistogramArgs) -> CliResult {
    let x = load_image(&a.x)?;
    let gt = load_image(&a.gt)?;
    let csv = residual_histogram(&x, &gt, a.bins)?.to_csv();
    emit(a.output.as_deref(), &csv)
}

fn emit(path: Option<&Path>, text: &str) -> CliResult {
    match path {
        Some(p) => write_text(p, text),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::io("stdout", e)),
    }
}

pub fn sweep(a: &SweepArgs) -> CliResult {
    check_sigma(a.sigma)?;
    let (task, _) = task_from_args(&a.task)?;
    let mut y = load_image(&a.input)?;
    if let Task::Demosaic { pattern } = task {
        y = as_mosaic(y, pattern)?;
    }
    let gt = load_image(&a.gt)?;
    let mut job = RestorationJob::with_defaults(DegradationSpec::new(task.clone(), a.sigma), y)?;
    let s = &job.schedule;
    let sigma_k = a.sigma_k.unwrap_or(s.sigma_k());
    let lambda = a.lambda.unwrap_or(s.lambda());
    job.schedule = HqsSchedule::build(1, sigma_k, sigma_k, lambda, a.sigma)?;
    job.ensemble = !a.no_ensemble;
    job.ground_truth = Some(gt);

    // Resolve once so a bad spec fails before any cell runs.
    make_denoiser(&a.denoiser, &task, denoise::DEFAULT_TIMEOUT)?;
    let spec = resolve_spec(&a.denoiser, &task);
    let factory = || -> pnp_restore::Result<Box<dyn Denoiser + Send>> {
        Ok(Box::new(DenoiserHandle::from_spec(&spec, denoise::DEFAULT_TIMEOUT)?))
    };
    let table = diagnostics::sweep(&job, &a.ks, &a.sigma1s, &factory, a.parallel)?;
    emit(a.output.as_deref(), &table.to_csv())
}

pub fn serve(a: &ServeArgs) -> CliResult {
    if a.denoiser.trim_start().starts_with("extern:") {
        return Err(Failure::usage("serve needs a built-in denoiser"));
    }
    let mut d = DenoiserHandle::from_spec(&a.denoiser, denoise::DEFAULT_TIMEOUT)?;
    let stdin = io::stdin();
    let stdout = io::stdout();
    let served = denoise::serve(&mut d, &mut stdin.lock(), &mut stdout.lock())
        .map_err(|e| Failure::usage(format!("protocol error: {e}")))?;
    eprintln!("pnpir serve: {served} requests");
    Ok(())
}
