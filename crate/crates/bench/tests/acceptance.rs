//! Acceptance run: one PASS/FAIL line per criterion, then a summary.
//!
//! Exits 0 whatever the verdicts so the regular test run stays usable for
//! reporting; set `ACCEPTANCE_STRICT=1` to exit 1 on any FAIL.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use lnmusic::io::{crlb_table, CrlbRow};
use lnmusic::{run_sweep, ExperimentPlan, ExperimentReport, MethodKind, MethodSpec, Sweep, SweepVariable};
use lnmusic_core::crlb::{log_likelihood, score, ModelPoint};
use lnmusic_core::lawson::{lawson_norm, weight_matrix};
use lnmusic_core::scene::incident_signal;
use lnmusic_core::{CVector, Complex64, NoiseGenerator, RisControlMatrix, SceneConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SNRS: [f64; 7] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];
const LN_ROSM: &str = "ln-music+rosm";
const LN: &str = "ln-music";
const LP: &str = "lp-adm+rosm";
const OMP: &str = "omp+rosm";

struct Verdict {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn plan(
    name: &str,
    variable: SweepVariable,
    values: &[f64],
    trials: usize,
    methods: Vec<MethodSpec>,
) -> ExperimentPlan {
    ExperimentPlan {
        name: name.into(),
        trials,
        sweep: Sweep {
            variable,
            values: values.to_vec(),
        },
        methods,
        crlb: false,
        ..ExperimentPlan::default()
    }
}

fn ln_rosm() -> Vec<MethodSpec> {
    vec![MethodSpec::new(MethodKind::LnMusic, true)]
}

fn rmse(report: &ExperimentReport, method: &str, value: f64) -> f64 {
    report
        .aggregate(method, value)
        .and_then(|a| a.rmse)
        .unwrap_or(f64::INFINITY)
}

fn curve(report: &ExperimentReport, method: &str, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| rmse(report, method, v)).collect()
}

fn fmt(v: &[f64]) -> String {
    let cells: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("[{}]", cells.join(", "))
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn noiseless_exactness() -> (bool, String) {
    let mut p = plan(
        "noiseless",
        SweepVariable::SnrDb,
        &[0.0],
        100,
        vec![MethodSpec::new(MethodKind::LnMusic, false)],
    );
    p.noiseless = true;
    let report = run_sweep(&p).expect("noiseless sweep");
    let mut worst = 0.0f64;
    let mut exact = 0;
    for r in &report.rows {
        let Some(est) = &r.estimate else { continue };
        let err = est.iter().zip(&r.truth).map(|(e, t)| (e - t).abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        if err <= 0.01 + 1e-9 {
            exact += 1;
        }
    }
    (
        exact == 100,
        format!("{exact}/100 seeds within 0.01 deg, worst error {worst:.4} deg"),
    )
}

fn lawson_units() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cvec = |rng: &mut ChaCha8Rng, len: usize| -> CVector {
        CVector::from_fn(len, |_, _| {
            Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
        })
    };
    let mut p2 = 0.0f64;
    for _ in 0..20 {
        let v = cvec(&mut rng, 12);
        let lambda = rng.random_range(1e-6..10.0);
        p2 = p2.max((lawson_norm(&v, lambda, 2.0).unwrap() - v.norm_squared()).abs() / v.norm_squared());
    }
    let mut lim = 0.0f64;
    for p in [0.2, 0.4, 0.7, 1.0, 1.5] {
        let v = cvec(&mut rng, 16);
        let want: f64 = v.iter().map(|c| c.norm().powf(p)).sum();
        lim = lim.max((lawson_norm(&v, 1e-8, p).unwrap() - want).abs() / want);
    }
    let mut grad = 0.0f64;
    for _ in 0..100 {
        let len = rng.random_range(1..12);
        let v = cvec(&mut rng, len);
        let lambda = rng.random_range(0.05..1.5);
        let p = rng.random_range(0.1..2.0);
        let h = weight_matrix(&v, lambda, p).unwrap();
        let (mut err, mut norm) = (0.0, 0.0);
        for k in 0..len {
            for (dir, an) in [
                (Complex64::new(1.0, 0.0), h[k] * v[k].re),
                (Complex64::new(0.0, 1.0), h[k] * v[k].im),
            ] {
                let step = 1e-6;
                let (mut a, mut b) = (v.clone(), v.clone());
                a[k] += dir * step;
                b[k] -= dir * step;
                let fd = (lawson_norm(&a, lambda, p).unwrap() - lawson_norm(&b, lambda, p).unwrap()) / (2.0 * step);
                err += (fd - an) * (fd - an);
                norm += an * an;
            }
        }
        grad = grad.max((err / norm).sqrt());
    }
    // p = 2 is exact up to rounding in the sum.
    let pass = p2 <= 1e-14 && lim <= 1e-4 && grad <= 1e-6;
    (
        pass,
        format!("p=2 rel {p2:.1e}, lambda->0 rel {lim:.1e}, gradient rel {grad:.1e}"),
    )
}

fn ordering(report: &ExperimentReport, elapsed: Duration) -> (bool, String) {
    let mut ok = true;
    let mut cells = Vec::new();
    for snr in [0.0, 10.0, 20.0] {
        let (a, b, c) = (
            rmse(report, LN_ROSM, snr),
            rmse(report, LP, snr),
            rmse(report, OMP, snr),
        );
        ok &= a < b && a < c;
        cells.push(format!("{snr} dB: {a:.4} vs lp {b:.4}, omp {c:.4}"));
    }
    let trend = curve(report, LN_ROSM, &SNRS);
    let monotone = non_increasing(&trend);
    let fast = elapsed < Duration::from_secs(600);
    (
        ok && monotone && fast,
        format!(
            "{}; ln+rosm over snr {} monotone={monotone}",
            cells.join("; "),
            fmt(&trend)
        ),
    )
}

fn rosm_gain(report: &ExperimentReport) -> (bool, String) {
    let ratios: Vec<f64> = SNRS
        .iter()
        .map(|&s| rmse(report, LN, s) / rmse(report, LN_ROSM, s))
        .collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let never_worse = ratios.iter().all(|r| *r >= 1.0);
    (
        mean >= 1.15 && never_worse,
        format!("mean ratio {mean:.3} (need >= 1.15), per snr {}", fmt(&ratios)),
    )
}

fn recovery(report: &ExperimentReport) -> (bool, String) {
    let a = report.aggregate(LN_ROSM, -5.0).expect("-5 dB aggregate");
    (
        a.recovery_rate >= 0.95,
        format!(
            "{} of {} trials recovered at -5 dB (rate {:.2}, need >= 0.95)",
            a.successes, a.trials, a.recovery_rate
        ),
    )
}

fn score_check() -> f64 {
    let scene = SceneConfig::default();
    let g = RisControlMatrix::random(&mut ChaCha8Rng::seed_from_u64(60), scene.slots, scene.elements);
    let z = incident_signal(&scene);
    let sigma2 = lnmusic_core::noise::calibrate_sigma2(&z, 10.0).unwrap();
    let noise = lnmusic_core::NoiseConfig {
        seed: 61,
        ..Default::default()
    };
    let var = noise.total_variance(sigma2);
    let y = g.measure(&z).unwrap() + NoiseGenerator::new(&noise).unwrap().sample(scene.slots, sigma2);
    let mut point = ModelPoint::of_scene(&scene);
    point.theta_rad[1] += 1e-3;
    point.x[2] *= Complex64::new(1.02, -0.01);
    let s = score(&y, &g, &scene, &point, var);
    let ll = |p: &ModelPoint| log_likelihood(&y, &g, &scene, p, var);
    let mut worst = 0.0f64;
    for n in 0..scene.targets() {
        let h = 1e-7;
        let (mut a, mut b) = (point.clone(), point.clone());
        a.theta_rad[n] += h;
        b.theta_rad[n] -= h;
        let fd = (ll(&a) - ll(&b)) / (2.0 * h);
        worst = worst.max((s.theta[n] - fd).abs() / fd.abs());
        let hx = 1e-9;
        for (dir, an) in [
            (Complex64::new(1.0, 0.0), 2.0 * s.x[n].re),
            (Complex64::new(0.0, 1.0), -2.0 * s.x[n].im),
        ] {
            let (mut a, mut b) = (point.clone(), point.clone());
            a.x[n] += dir * hx;
            b.x[n] -= dir * hx;
            let fd = (ll(&a) - ll(&b)) / (2.0 * hx);
            worst = worst.max((an - fd).abs() / fd.abs());
        }
    }
    worst
}

fn crlb_consistency(report: &ExperimentReport, table: &[CrlbRow]) -> (bool, String) {
    let bound: Vec<f64> = table.iter().map(|r| r.rosm_deg.unwrap_or(f64::NAN)).collect();
    let decreasing = bound.windows(2).all(|w| w[1] < w[0]);
    let measured = curve(report, LN_ROSM, &SNRS);
    let above = measured.iter().zip(&bound).all(|(m, b)| m >= b);
    let fd = score_check();
    // Bound with only the Gaussian component of the noise, for reference.
    let gaussian_only: Vec<f64> = bound.iter().map(|b| b / 11f64.sqrt()).collect();
    (
        decreasing && above && fd <= 1e-5,
        format!(
            "crlb {} decreasing={decreasing}; rmse {} above={above}; score fd rel {fd:.1e}; gaussian-only bound {}",
            fmt(&bound),
            fmt(&measured),
            fmt(&gaussian_only)
        ),
    )
}

fn size_trends() -> (bool, String) {
    let ms = [8.0, 16.0, 24.0, 32.0, 40.0];
    let ks = [32.0, 64.0, 128.0, 256.0];
    let mut pm = plan("elements", SweepVariable::Elements, &ms, 50, ln_rosm());
    pm.noise.snr_db = 10.0;
    let mut pk = plan("slots", SweepVariable::Slots, &ks, 50, ln_rosm());
    pk.noise.snr_db = 10.0;
    let rm = curve(&run_sweep(&pm).expect("M sweep"), LN_ROSM, &ms);
    let rk = curve(&run_sweep(&pk).expect("K sweep"), LN_ROSM, &ks);
    let first = (rm[0] - rm[1]).abs() / 8.0;
    let last = (rm[3] - rm[4]).abs() / 8.0;
    let flat = last < 0.5 * first;
    let pass = non_increasing(&rm) && non_increasing(&rk) && flat;
    (
        pass,
        format!(
            "rmse over M {} over K {}; slope 8->16 {first:.4}/elem, 32->40 {last:.4}/elem",
            fmt(&rm),
            fmt(&rk)
        ),
    )
}

fn distance_trend() -> (bool, String) {
    let ds = [3.0, 6.0, 9.0, 12.0];
    let mut ok = true;
    let mut cells = Vec::new();
    for snr in [10.0, 15.0, 20.0] {
        let mut p = plan("distance", SweepVariable::RisAntennaDistance, &ds, 100, ln_rosm());
        p.noise.snr_db = snr;
        let r = curve(&run_sweep(&p).expect("distance sweep"), LN_ROSM, &ds);
        ok &= r.iter().all(|x| *x < 0.1);
        cells.push(format!("{snr} dB {}", fmt(&r)));
    }
    (ok, format!("rmse over d_r = 3,6,9,12: {}", cells.join("; ")))
}

fn determinism() -> (bool, String) {
    let p = plan(
        "determinism",
        SweepVariable::SnrDb,
        &[-5.0, 10.0],
        8,
        ExperimentPlan::default().methods,
    );
    let mut outputs = Vec::new();
    for workers in [1, 2, 0, 1] {
        let mut q = p.clone();
        q.workers = workers;
        q.crlb = true;
        let r = run_sweep(&q).expect("determinism sweep");
        outputs.push((r.rows_csv(), r.aggregates_csv()));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    (
        same,
        format!(
            "{} runs over worker counts 1,2,all,1 byte-identical={same}",
            outputs.len()
        ),
    )
}

fn timed(id: usize, name: &'static str, f: impl FnOnce() -> (bool, String)) -> Verdict {
    let start = Instant::now();
    let (pass, detail) = f();
    Verdict {
        id,
        name,
        pass,
        detail,
        elapsed: start.elapsed(),
    }
}

fn main() -> ExitCode {
    let mut verdicts = Vec::new();
    let mut v = timed(1, "noiseless exactness", noiseless_exactness);
    if v.elapsed >= Duration::from_secs(60) {
        v.pass = false;
        v.detail.push_str("; over the 1 min budget");
    }
    verdicts.push(v);
    verdicts.push(timed(2, "lawson-norm unit suite", lawson_units));

    let start = Instant::now();
    let mut snr_plan = plan(
        "snr",
        SweepVariable::SnrDb,
        &SNRS,
        100,
        ExperimentPlan::default().methods,
    );
    snr_plan.crlb = false;
    let report = run_sweep(&snr_plan).expect("snr sweep");
    let sweep_time = start.elapsed();
    let mut crlb_plan = snr_plan.clone();
    crlb_plan.methods = ln_rosm();
    let table = crlb_table(&crlb_plan).expect("crlb table");

    verdicts.push(timed(3, "impulsive-noise ordering", || ordering(&report, sweep_time)));
    verdicts.push(timed(4, "rosm gain", || rosm_gain(&report)));
    verdicts.push(timed(5, "recovery rate at -5 dB", || recovery(&report)));
    verdicts.push(timed(6, "crlb consistency", || crlb_consistency(&report, &table)));
    verdicts.push(timed(7, "M and K trends", size_trends));
    verdicts.push(timed(8, "ris-antenna distance trend", distance_trend));
    verdicts.push(timed(9, "determinism", determinism));

    println!();
    for v in &verdicts {
        println!(
            "criterion {} {:<28} {}  ({:.1}s) {}",
            v.id,
            v.name,
            if v.pass { "PASS" } else { "FAIL" },
            v.elapsed.as_secs_f64(),
            v.detail
        );
    }
    println!("snr sweep for criteria 3-6 took {:.1}s", sweep_time.as_secs_f64());
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("acceptance: {passed}/{} criteria passed", verdicts.len());

    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < verdicts.len() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
