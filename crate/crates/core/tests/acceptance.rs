//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! report is always printed; exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use pnp_restore::degrade::{
    apply_degradation, sfold_downsample, zerofill_upsample, BlurKernel, CfaPattern,
    DegradationSpec, Task,
};
use pnp_restore::denoise::{median3x3, tv_prox, tv_prox_plane, Denoiser, DenoiserHandle};
use pnp_restore::prox::{deblur_prox, demosaic_prox, sisr_prox_closed};
use pnp_restore::schedule::HqsSchedule;
use pnp_restore::solver::{default_tv_kappa, run, RestorationJob};
use pnp_restore::tensor::{psnr, Dihedral8, Image};
use rand::Rng;

const DEBLUR_ORACLE_TOL: f64 = 1e-6;
const DEBLUR_ORACLE_BUDGET_S: f64 = 1.0;
const SISR_ORACLE_TOL: f64 = 1e-6;
const SISR_UNIT_SCALE_TOL: f64 = 1e-10;
const DEMOSAIC_ULPS: f64 = 4.0;
const SCHEDULE_RATIO_TOL: f64 = 1e-12;
const ENSEMBLE_TOL: f64 = 1e-8;
const TV_ORACLE_TOL: f64 = 1e-4;
const DEBLUR_GAIN_DB: f64 = 1.0;
const DEMOSAIC_GAIN_DB: f64 = 0.3;
const PER_IMAGE_BUDGET_S: f64 = 30.0;

type Outcome = std::result::Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn deblur_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(100);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = random_kernel(&mut r, 3, 3);
        let y = random_image(&mut r, 1, 8, 8);
        let z = random_image(&mut r, 1, 8, 8);
        let a = dense_kernel(&k, 8, 8);
        for alpha in [0.01, 0.3, 10.0] {
            let got = deblur_prox(&k, &y, &z, alpha).map_err(|e| e.to_string())?;
            let want = dense_prox(&a, &to_vec(&y), &to_vec(&z), alpha);
            worst = worst.max((to_vec(&got) - want).amax());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst <= DEBLUR_ORACLE_TOL && secs < DEBLUR_ORACLE_BUDGET_S,
        format!("max error {worst:.2e} (tol {DEBLUR_ORACLE_TOL:.0e}), {secs:.3}s (budget {DEBLUR_ORACLE_BUDGET_S}s)"),
    )
}

fn sisr_oracle() -> Outcome {
    let mut r = rng(101);
    let mut worst: f64 = 0.0;
    let gaussian = BlurKernel::gaussian(1.2, 1.2, 0.0, 5).unwrap();
    let a_delta = dense_decimation(8, 8, 2) * dense_kernel(&BlurKernel::delta(), 8, 8);
    let a_gauss = dense_decimation(8, 8, 2) * dense_kernel(&gaussian, 8, 8);
    for case in 0..20 {
        let (k, a) = if case % 2 == 0 {
            (BlurKernel::delta(), &a_delta)
        } else {
            (gaussian.clone(), &a_gauss)
        };
        let y = random_image(&mut r, 1, 4, 4);
        let z = random_image(&mut r, 1, 8, 8);
        let alpha = 10f64.powf(r.random_range(-2.0..1.0));
        let got = sisr_prox_closed(&k, &y, &z, alpha, 2).map_err(|e| e.to_string())?;
        let want = dense_prox(a, &to_vec(&y), &to_vec(&z), alpha);
        worst = worst.max((to_vec(&got) - want).amax());
    }
    let mut unit: f64 = 0.0;
    for _ in 0..20 {
        let k = random_kernel(&mut r, 3, 3);
        let y = random_image(&mut r, 1, 8, 8);
        let z = random_image(&mut r, 1, 8, 8);
        let a = sisr_prox_closed(&k, &y, &z, 0.3, 1).map_err(|e| e.to_string())?;
        let b = deblur_prox(&k, &y, &z, 0.3).map_err(|e| e.to_string())?;
        unit = unit.max(a.max_abs_diff(&b).unwrap());
    }
    check(
        worst <= SISR_ORACLE_TOL && unit <= SISR_UNIT_SCALE_TOL,
        format!("s=2 max error {worst:.2e} (tol {SISR_ORACLE_TOL:.0e}); s=1 vs deblur {unit:.2e} (tol {SISR_UNIT_SCALE_TOL:.0e})"),
    )
}

fn demosaic_exactness() -> Outcome {
    let mut r = rng(102);
    let mut worst_ulps: f64 = 0.0;
    for _ in 0..20 {
        let mask_data = (0..3 * 64).map(|_| f64::from(u8::from(r.random::<bool>()))).collect();
        let mask = Image::new(3, 8, 8, mask_data).unwrap();
        let y = random_image(&mut r, 3, 8, 8);
        let z = random_image(&mut r, 3, 8, 8);
        let alpha = 10f64.powf(r.random_range(-4.0..2.0));
        let x = demosaic_prox(&mask, &y, &z, alpha).map_err(|e| e.to_string())?;
        for k in 0..x.len() {
            let (m, yv, zv) = (mask.data()[k], y.data()[k], z.data()[k]);
            // Vertex of (m + α)t² − 2(m·y + α·z)t.
            let vertex = 2.0 * (m * yv + alpha * zv) / (2.0 * (m + alpha));
            let ulps = (x.data()[k] - vertex).abs() / (f64::EPSILON * vertex.abs().max(f64::MIN_POSITIVE));
            worst_ulps = worst_ulps.max(ulps);
        }
    }
    check(
        worst_ulps <= DEMOSAIC_ULPS,
        format!("worst deviation {worst_ulps:.1} ulp (tol {DEMOSAIC_ULPS} ulp)"),
    )
}

fn schedule() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (k, sigma_k, sigma) in [(8usize, 7.65, 7.65), (24, 3.0, 3.0), (40, 0.6, 0.0), (8, 2.55, 2.55)] {
        let s = HqsSchedule::build(k, 49.0, sigma_k, 0.23, sigma).map_err(|e| e.to_string())?;
        ok &= s.sigmas()[0] == 49.0 && s.sigmas()[k - 1] == sigma_k;
        let r0 = s.sigmas()[1] / s.sigmas()[0];
        let drift = s
            .sigmas()
            .windows(2)
            .map(|w| (w[1] / w[0] - r0).abs())
            .fold(0.0, f64::max);
        ok &= drift < SCHEDULE_RATIO_TOL;
        if sigma_k == sigma {
            let dev = (s.alphas()[k - 1] - 0.23).abs();
            ok &= dev < 1e-15;
            notes.push(format!("K={k}: ratio drift {drift:.1e}, |alpha_K - lambda| {dev:.1e}"));
        } else {
            notes.push(format!("K={k}: ratio drift {drift:.1e}"));
        }
    }
    check(ok, notes.join("; "))
}

struct SymmetricBlur;

impl Denoiser for SymmetricBlur {
    fn denoise(&mut self, img: &Image, sigma255: f64) -> pnp_restore::Result<Image> {
        let t = (sigma255 / 255.0).min(0.2);
        let k = BlurKernel::normalized(3, 3, vec![t, t, t, t, 1.0, t, t, t, t])?;
        pnp_restore::freq::circular_convolve(img, &k)
    }

    fn name(&self) -> String {
        "symmetric-blur".into()
    }
}

struct Median;

impl Denoiser for Median {
    fn denoise(&mut self, img: &Image, _: f64) -> pnp_restore::Result<Image> {
        Ok(median3x3(img))
    }

    fn name(&self) -> String {
        "median".into()
    }
}

fn adjoint_and_group() -> Outcome {
    let mut r = rng(103);
    let mut adjoint_ok = true;
    for s in [2usize, 3, 4] {
        let x = random_image(&mut r, 3, 4 * s, 3 * s);
        let y = random_image(&mut r, 3, 4, 3);
        let lhs = sfold_downsample(&x, s).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&zerofill_upsample(&y, s).unwrap()).unwrap();
        adjoint_ok &= lhs == rhs;
    }

    let img = random_image(&mut r, 3, 5, 7);
    let mut group_ok = true;
    for a in Dihedral8::all() {
        group_ok &= a.inverse().apply(&a.apply(&img)) == img;
        group_ok &= a.then(a.inverse()) == Dihedral8::IDENTITY;
        for b in Dihedral8::all() {
            group_ok &= a.then(b).apply(&img) == b.apply(&a.apply(&img));
            group_ok &= Dihedral8::all().any(|g| g == a.then(b));
        }
    }

    let gt = fixture_image("coffee_rgb.png").crop(24, 24).unwrap();
    let tasks = [
        Task::Deblur { kernel: BlurKernel::gaussian(1.2, 1.2, 0.0, 5).unwrap() },
        Task::ClassicalSr { scale: 2, kernel: BlurKernel::gaussian(1.2, 1.2, 0.0, 5).unwrap() },
        Task::Demosaic { pattern: CfaPattern::RGGB },
    ];
    let mut worst: f64 = 0.0;
    for task in tasks {
        let spec = DegradationSpec::new(task, 2.55);
        let y = apply_degradation(&gt, &spec, 3).map_err(|e| e.to_string())?;
        let on = RestorationJob::with_defaults(spec, y).map_err(|e| e.to_string())?;
        let mut off = on.clone();
        off.ensemble = false;
        let denoisers: [&mut dyn Denoiser; 3] =
            [&mut DenoiserHandle::Identity, &mut Median, &mut SymmetricBlur];
        for d in denoisers {
            let a = run(&on, d).map_err(|e| e.to_string())?;
            let b = run(&off, d).map_err(|e| e.to_string())?;
            worst = worst.max(a.image.max_abs_diff(&b.image).unwrap());
        }
    }
    check(
        adjoint_ok && group_ok && worst < ENSEMBLE_TOL,
        format!("adjoint exact: {adjoint_ok}; group closure/inverse: {group_ok}; ensemble deviation {worst:.1e} (tol {ENSEMBLE_TOL:.0e})"),
    )
}

fn tv_oracle() -> Outcome {
    let mut r = rng(104);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let f: Vec<f64> = (0..16).map(|_| r.random::<f64>()).collect();
        let weight = r.random_range(0.01..0.5);
        let got = tv_prox_plane(&f, 4, 4, weight);
        let want = tv_prox_dual_oracle(&f, 4, 4, weight);
        worst = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    let mut expansions = 0;
    for _ in 0..100 {
        let a = random_image(&mut r, 1, 8, 8);
        let b = random_image(&mut r, 1, 8, 8);
        let weight = r.random_range(0.0..0.3);
        let d_out = tv_prox(&a, weight).sub(&tv_prox(&b, weight)).unwrap().norm();
        if d_out > a.sub(&b).unwrap().norm() * (1.0 + 1e-9) {
            expansions += 1;
        }
    }
    check(
        worst < TV_ORACLE_TOL && expansions == 0,
        format!("dual-QP max error {worst:.2e} (tol {TV_ORACLE_TOL:.0e}); expansive pairs {expansions}/100"),
    )
}

fn motion_job(seed: u64) -> std::result::Result<RestorationJob, String> {
    let gt = fixture_image("camera_gray.png");
    let kernel = fixture_kernel("motion_standin.txt");
    let spec = DegradationSpec::new(Task::Deblur { kernel }, 7.65);
    let y = apply_degradation(&gt, &spec, seed).map_err(|e| e.to_string())?;
    let mut job = RestorationJob::with_defaults(spec, y).map_err(|e| e.to_string())?;
    job.ground_truth = Some(gt);
    Ok(job)
}

fn tv_for(job: &RestorationJob) -> DenoiserHandle {
    DenoiserHandle::Tv { kappa: default_tv_kappa(&job.spec.task) }
}

fn end_to_end() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;

    let job = motion_job(0)?;
    let gt = job.ground_truth.clone().unwrap();
    let defaults = job.schedule.len() == 8
        && job.schedule.sigma1() == 49.0
        && job.schedule.sigma_k() == 7.65
        && job.schedule.lambda() == 0.23;
    let start = Instant::now();
    let out = run(&job, &mut tv_for(&job)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let before = psnr(&job.y, &gt, 0).unwrap();
    let after = psnr(&out.image, &gt, 0).unwrap();
    ok &= defaults && after - before >= DEBLUR_GAIN_DB && secs < PER_IMAGE_BUDGET_S;
    notes.push(format!("deblur {before:.2} -> {after:.2} dB in {secs:.2}s"));

    for name in ["astronaut_rgb.png", "coffee_rgb.png"] {
        let gt = fixture_image(name);
        let spec = DegradationSpec::new(Task::Demosaic { pattern: CfaPattern::RGGB }, 0.0);
        let y = apply_degradation(&gt, &spec, 0).map_err(|e| e.to_string())?;
        let job = RestorationJob::with_defaults(spec, y).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let out = run(&job, &mut tv_for(&job)).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        let before = psnr(&out.initial, &gt, 0).unwrap();
        let after = psnr(&out.image, &gt, 0).unwrap();
        ok &= job.schedule.len() == 40
            && after - before >= DEMOSAIC_GAIN_DB
            && secs < PER_IMAGE_BUDGET_S;
        notes.push(format!("demosaic {name} {before:.2} -> {after:.2} dB in {secs:.2}s"));
    }
    check(ok, notes.join("; "))
}

fn sweep_trend() -> Outcome {
    let template = motion_job(0)?;
    let factory = |kappa: f64| {
        move || -> pnp_restore::Result<Box<dyn Denoiser + Send>> {
            Ok(Box::new(DenoiserHandle::Tv { kappa }))
        }
    };
    let kappa = default_tv_kappa(&template.spec.task);
    let table = pnp_restore::diagnostics::sweep(
        &template,
        &[4, 8, 24],
        &[9.0, 49.0],
        &factory(kappa),
        true,
    )
    .map_err(|e| e.to_string())?;
    let cell = |k, s| table.get(k, s).unwrap();
    let ok = cell(8, 49.0) > cell(8, 9.0) && cell(24, 9.0) > cell(4, 9.0);
    check(
        ok,
        format!(
            "(8,49) {:.2} vs (8,9) {:.2}; (24,9) {:.2} vs (4,9) {:.2} dB",
            cell(8, 49.0),
            cell(8, 9.0),
            cell(24, 9.0),
            cell(4, 9.0)
        ),
    )
}

fn determinism() -> Outcome {
    let gt = fixture_image("coffee_rgb.png").crop(48, 48).unwrap();
    let kernel = BlurKernel::gaussian(1.6, 1.6, 0.0, 9).unwrap();
    let specs = [
        DegradationSpec::new(Task::Deblur { kernel: kernel.clone() }, 7.65),
        DegradationSpec::new(Task::ClassicalSr { scale: 2, kernel }, 2.55),
        DegradationSpec::new(Task::BicubicSr { scale: 3 }, 0.0),
        DegradationSpec::new(Task::Demosaic { pattern: CfaPattern::RGGB }, 2.55),
    ];
    let mut ok = true;
    let mut runs = 0;
    for spec in specs {
        let y1 = apply_degradation(&gt, &spec, 42).map_err(|e| e.to_string())?;
        let y2 = apply_degradation(&gt, &spec, 42).map_err(|e| e.to_string())?;
        ok &= y1 == y2;
        let mut job = RestorationJob::with_defaults(spec, y1).map_err(|e| e.to_string())?;
        job.ground_truth = Some(gt.clone());
        for name in ["identity", "tv:3", "dct", "median"] {
            let timeout = pnp_restore::denoise::DEFAULT_TIMEOUT;
            let mut d1 = DenoiserHandle::from_spec(name, timeout).unwrap();
            let mut d2 = DenoiserHandle::from_spec(name, timeout).unwrap();
            let a = run(&job, &mut d1).map_err(|e| e.to_string())?;
            let b = run(&job, &mut d2).map_err(|e| e.to_string())?;
            ok &= a.image == b.image
                && a.trace.len() == b.trace.len()
                && a.trace.iter().zip(&b.trace).all(|(p, q)| p.same_values(q));
            runs += 1;
        }
    }
    check(ok, format!("{runs} paired runs bit-identical: {ok}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("closed-form deblur oracle", deblur_oracle),
        ("closed-form SISR oracle", sisr_oracle),
        ("demosaic prox exactness", demosaic_exactness),
        ("schedule endpoints, ratio and alpha_K", schedule),
        ("adjoint, dihedral group and ensemble neutrality", adjoint_and_group),
        ("TV prox oracle and nonexpansiveness", tv_oracle),
        ("end-to-end improvement", end_to_end),
        ("(K, sigma1) sweep trend", sweep_trend),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
