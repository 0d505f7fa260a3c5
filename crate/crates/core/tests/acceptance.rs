//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints one PASS/FAIL line; the process fails if any does.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use arrow_sysid::estimation::{
    estimate_fir, fit_nested, fit_parametric, nonparametric_vaf, sensitivity_sweep, FitOptions,
    SensitivityParameter,
};
use arrow_sysid::models::{
    bode, impulse_response, sampled_impulse_response, simulate_zoh, stiffness_from_static_spine,
    ModelKind, SecondOrderModel, SpineRating,
};
use arrow_sysid::rigsim::{simulate_rig, RigConfig};
use arrow_sysid::signals::{
    convolve, correlation, generate_prbs, toeplitz_solve, Dataset, TimeSeries,
    TOEPLITZ_REGULARIZATION,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 4000.0;
const DT: f64 = 1.0 / FS;

fn arr300() -> SecondOrderModel {
    SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

// 1. Static spine conversion.
fn spine_conversion() -> Outcome {
    let printed = [(300.0, 1132.9), (500.0, 679.7), (600.0, 566.4)];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (spine, k_printed) in printed {
        let k =
            stiffness_from_static_spine(SpineRating::from_spine_number(spine).unwrap()).unwrap();
        worst = worst.max(rel(k, k_printed));
        parts.push(format!("{spine:.0}: {k:.1}"));
    }
    let k_metric = stiffness_from_static_spine(SpineRating::new(0.0152).unwrap()).unwrap();
    let metric_ok = (k_metric - 567.9).abs() <= 1.5;
    outcome(
        worst <= 1.5e-3 && metric_ok,
        format!(
            "{} N/m, worst {:.3}% (limit 0.15%); 0.0152 m -> {k_metric:.1} N/m (567.9 +/- 1.5)",
            parts.join(", "),
            100.0 * worst
        ),
    )
}

// 2. Lumped algebra against every compiled-estimates row.
fn compiled_table_consistency() -> Outcome {
    // (name, Hz, zeta, M g, B Ns/m, K N/m)
    let rows = [
        ("Carbon 300", 40.3, 0.32, 13.5, 2.2, 853.6),
        ("Carbon 500", 34.5, 0.39, 10.3, 1.7, 486.2),
        ("Carbon 600", 35.3, 0.51, 9.8, 2.3, 490.8),
        ("Al 2219", 40.8, 0.67, 22.7, 7.8, 1484.7),
        ("Al 1916", 31.6, 0.53, 14.8, 3.1, 585.1),
        ("Cedar 405V", 38.3, 0.52, 15.4, 3.7, 891.6),
        ("Cedar 405H", 37.4, 0.53, 17.5, 4.5, 967.7),
        ("Cedar 520V", 31.9, 0.50, 14.7, 3.1, 592.2),
        ("Cedar 520H", 31.3, 0.55, 13.6, 2.9, 525.5),
    ];
    let mut misses = Vec::new();
    for (name, f, zeta, m_g, b, k) in rows {
        let w = 2.0 * std::f64::consts::PI * f;
        let m = m_g * 1e-3;
        let k_calc = m * w * w;
        let b_calc = 2.0 * zeta * w * m;
        let (ek, eb) = ((k_calc - k) / k, (b_calc - b) / b);
        if ek.abs() > 0.03 {
            misses.push(format!("{name} K {:+.2}%", 100.0 * ek));
        }
        if eb.abs() > 0.03 {
            misses.push(format!("{name} B {:+.2}%", 100.0 * eb));
        }
    }
    let detail = if misses.is_empty() {
        "all nine rows within 3% on K and B".to_string()
    } else {
        format!("outside 3%: {}", misses.join(", "))
    };
    outcome(misses.is_empty(), detail)
}

fn noiseless_dataset(model: &SecondOrderModel, seconds: f64, seed: u64) -> Dataset {
    let n = (seconds * FS) as usize;
    let u = generate_prbs(n, 1.0, 1, seed, DT).unwrap();
    let y = simulate_zoh(model, &u).unwrap();
    Dataset::new(DT, u.into_values(), y.into_values()).unwrap()
}

// 3. Noiseless round trip.
fn noiseless_round_trip() -> Outcome {
    let start = Instant::now();
    let truth = arr300();
    let data = noiseless_dataset(&truth, 30.0, 3);
    let fit = fit_parametric(&data, ModelKind::NoZero, None, &FitOptions::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let errs = [
        rel(fit.model.gain, truth.gain),
        rel(fit.model.zeta, truth.zeta),
        rel(fit.model.omega, truth.omega),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= 1e-3 && fit.vaf_percent > 99.99 && secs < 60.0,
        format!(
            "G {:.3e} zeta {:.5} omega {:.3}; worst error {:.2e} (limit 1e-3); VAF {:.5}%; {secs:.1} s",
            fit.model.gain,
            fit.model.zeta,
            fit.model.omega,
            worst,
            fit.vaf_percent
        ),
    )
}

fn rig_dataset() -> Dataset {
    let mut cfg = RigConfig::new(arr300());
    cfg.displacement_noise_std = 20e-6;
    cfg.seed = 41;
    let cmd = generate_prbs((30.0 * FS) as usize, 6.0, 8, 7, DT).unwrap();
    simulate_rig(&cfg, &cmd).unwrap().dataset
}

// 4. Round trip through the rig.
fn rig_round_trip(data: &Dataset) -> Outcome {
    let start = Instant::now();
    let truth = arr300();
    let fit = fit_parametric(data, ModelKind::NoZero, None, &FitOptions::default()).unwrap();
    let fir = estimate_fir(data, 1501).unwrap();
    let np = nonparametric_vaf(data, &fir).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ez = rel(fit.model.zeta, truth.zeta);
    let ew = rel(fit.model.omega, truth.omega);
    outcome(
            ez <= 0.05 && ew <= 0.05 && fit.vaf_percent >= 95.0 && np >= fit.vaf_percent && secs < 120.0,
            format!(
                "zeta {:.4} ({:+.2}%), omega {:.2} ({:+.2}%); VAF parametric {:.3}%, FIR {:.3}%; {secs:.1} s",
                fit.model.zeta,
                100.0 * (fit.model.zeta / truth.zeta - 1.0),
                fit.model.omega,
                100.0 * (fit.model.omega / truth.omega - 1.0),
                fit.vaf_percent,
                np
            ),
        )
}

// 5. Nesting on the rig dataset.
fn nesting(data: &Dataset) -> Outcome {
    let opts = FitOptions::default();
    let nz = fit_parametric(data, ModelKind::NoZero, None, &opts).unwrap();
    let oz = fit_nested(data, ModelKind::OneZero, &[&nz], &opts).unwrap();
    let zp = fit_nested(data, ModelKind::ZeroPair, &[&nz], &opts).unwrap();
    let slack = 1e-6;
    outcome(
        nz.vaf_percent <= oz.vaf_percent + slack && nz.vaf_percent <= zp.vaf_percent + slack,
        format!(
            "VAF no-zero {:.6}%, one-zero {:.6}%, zero-pair {:.6}%",
            nz.vaf_percent, oz.vaf_percent, zp.vaf_percent
        ),
    )
}

// 6a. Levinson solution against dense regularized least squares.
fn toeplitz_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.random_range(100..=500);
        let m = rng.random_range(2..=50);
        let dt = 1e-3;
        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let us = TimeSeries::new(dt, u.clone()).unwrap();
        let ys = TimeSeries::new(dt, y.clone()).unwrap();
        let h = toeplitz_solve(
            &correlation(&us, &us, m).unwrap(),
            &correlation(&us, &ys, m).unwrap(),
        )
        .unwrap();

        // Full-length convolution rows (zero padded at both ends) reproduce
        // the biased correlations; the ridge rows reproduce the load.
        let r0: f64 = u.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let mu = dt * dt * n as f64 * TOEPLITZ_REGULARIZATION * r0;
        let rows = n + m - 1;
        let mut a = DMatrix::zeros(rows + m, m);
        let mut b = DVector::zeros(rows + m);
        for r in 0..rows {
            for k in 0..m {
                if r >= k && r - k < n {
                    a[(r, k)] = dt * u[r - k];
                }
            }
            if r < n {
                b[r] = y[r];
            }
        }
        for k in 0..m {
            a[(rows + k, k)] = mu.sqrt();
        }
        let dense = a.svd(true, true).solve(&b, 1e-300).unwrap();
        let scale = dense.amax();
        for (x, e) in h.iter().zip(dense.iter()) {
            worst = worst.max((x - e).abs() / scale);
        }
    }
    outcome(
        worst <= 1e-8,
        format!("20 instances, max relative tap error {worst:.2e} (limit 1e-8)"),
    )
}

fn rk4_no_zero_impulse(g: f64, zeta: f64, omega: f64, t_end: f64, steps: usize) -> Vec<(f64, f64)> {
    // x'' + 2 zeta omega x' + omega^2 x = 0, x(0) = 0, x'(0) = g omega^2
    let f = |x: [f64; 2]| [x[1], -2.0 * zeta * omega * x[1] - omega * omega * x[0]];
    let h = t_end / steps as f64;
    let mut x = [0.0, g * omega * omega];
    let mut out = Vec::with_capacity(steps);
    for i in 1..=steps {
        let k1 = f(x);
        let k2 = f([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = f([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = f([x[0] + h * k3[0], x[1] + h * k3[1]]);
        for j in 0..2 {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out.push((i as f64 * h, x[0]));
    }
    out
}

// 6b. Closed-form impulse response against ODE integration.
fn impulse_oracle() -> Outcome {
    let cases = [
        (2.64e-4, 0.285, 239.16),
        (1.2e-3, 0.1, 400.0),
        (5e-4, 0.8, 100.0),
    ];
    let mut worst: f64 = 0.0;
    for (g, zeta, omega) in cases {
        let m = SecondOrderModel::no_zero(g, zeta, omega).unwrap();
        let t_end = 10.0 / (zeta * omega);
        let ode = rk4_no_zero_impulse(g, zeta, omega, t_end, 200_000);
        let peak = ode.iter().fold(0.0f64, |a, (_, v)| a.max(v.abs()));
        for (t, v) in ode {
            worst = worst.max((impulse_response(&m, t).unwrap() - v).abs() / peak);
        }
    }
    outcome(
        worst <= 1e-6,
        format!("3 plants over (0, 10/(zeta omega)], max error / peak {worst:.2e} (limit 1e-6)"),
    )
}

fn relative_gap(y: &[f64], reference: &[f64]) -> f64 {
    let peak = reference.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    y.iter()
        .zip(reference)
        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()))
        / peak
}

// 6c. Hold simulation against truncated convolution.
fn zoh_vs_convolution() -> (Outcome, String) {
    let m = arr300();
    let u = generate_prbs(20_000, 1.0, 4, 66, DT).unwrap();
    let zoh = simulate_zoh(&m, &u).unwrap();
    let n_taps = (10.0 / (m.zeta * m.omega) / DT).ceil() as usize;
    let taps = sampled_impulse_response(&m, DT, n_taps).unwrap();
    let conv = convolve(&u, &taps, DT).unwrap();
    let gap = relative_gap(conv.values(), zoh.values());

    // Exact pulse taps: differences of the closed-form step response.
    let (sigma, wd) = (m.zeta * m.omega, m.omega * (1.0 - m.zeta * m.zeta).sqrt());
    let step = |t: f64| {
        m.gain * (1.0 - (-sigma * t).exp() * ((wd * t).cos() + sigma / wd * (wd * t).sin()))
    };
    let pulse: Vec<f64> = (0..n_taps)
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                (step(k as f64 * DT) - step((k - 1) as f64 * DT)) / DT
            }
        })
        .collect();
    let exact = convolve(&u, &pulse, DT).unwrap();
    let supplement = relative_gap(exact.values(), zoh.values());
    (
        outcome(
            gap <= 1e-6,
            format!("{n_taps} sampled impulse taps, max error / peak {gap:.2e} (limit 1e-6)"),
        ),
        format!("step-difference pulse taps, max error / peak {supplement:.2e}"),
    )
}

// 7. Sensitivity sweeps peak at truth.
fn sensitivity_peaks() -> Outcome {
    let truth = arr300();
    let data = noiseless_dataset(&truth, 10.0, 8);
    let fit = fit_parametric(
        &data,
        ModelKind::NoZero,
        Some(&truth),
        &FitOptions::default(),
    )
    .unwrap();
    let mut parts = Vec::new();
    let mut pass = true;
    for p in [
        SensitivityParameter::Gain,
        SensitivityParameter::Damping,
        SensitivityParameter::Frequency,
    ] {
        let curve = sensitivity_sweep(&data, &fit, p, 0.2, 21).unwrap();
        let t = truth.parameter(p).unwrap();
        let nearest = (0..curve.grid.len())
            .min_by(|&a, &b| {
                (curve.grid[a] - t)
                    .abs()
                    .total_cmp(&(curve.grid[b] - t).abs())
            })
            .unwrap();
        let peak = curve.peak_index();
        pass &= peak == nearest;
        parts.push(format!("{p} peak {peak} nearest {nearest}"));
    }
    outcome(pass, parts.join(", "))
}

// 8. Anti-resonance of a lightly damped zero pair.
fn anti_resonance() -> Outcome {
    let zc = 1500.0;
    let m = SecondOrderModel::zero_pair(2.64e-4, 0.285, 239.16, zc, 0.05).unwrap();
    let n = 10_000;
    let grid: Vec<f64> = (0..n)
        .map(|i| 10f64.powf(1.0 + 4.0 * i as f64 / (n - 1) as f64))
        .collect();
    let mag: Vec<f64> = bode(&m, &grid)
        .unwrap()
        .into_iter()
        .map(|(a, _)| a)
        .collect();
    let minima: Vec<f64> = (1..n - 1)
        .filter(|&i| mag[i] < mag[i - 1] && mag[i] < mag[i + 1])
        .map(|i| grid[i])
        .collect();
    let best = minima
        .iter()
        .cloned()
        .min_by(|a, b| rel(*a, zc).total_cmp(&rel(*b, zc)));
    match best {
        Some(w) => outcome(
            rel(w, zc) <= 0.01,
            format!(
                "local minimum at {w:.1} rad/s, {:.3}% from z_c = {zc}",
                100.0 * rel(w, zc)
            ),
        ),
        None => outcome(false, "no local minimum on the grid"),
    }
}

// 9. Byte-identical reports from repeated command-line runs.
fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_arrowid");
    let run = |dir: &Path| -> Result<Vec<u8>, String> {
        let cmd = dir.join("command.csv");
        let data = dir.join("rig.csv");
        let report = dir.join("report.txt");
        let steps: [Vec<&std::ffi::OsStr>; 3] = [
            vec![
                "gen-input".as_ref(),
                "--output".as_ref(),
                cmd.as_os_str(),
                "--duration".as_ref(),
                "10".as_ref(),
                "--amplitude".as_ref(),
                "6".as_ref(),
                "--hold".as_ref(),
                "8".as_ref(),
                "--seed".as_ref(),
                "12".as_ref(),
            ],
            vec![
                "simulate".as_ref(),
                "--command".as_ref(),
                cmd.as_os_str(),
                "--output".as_ref(),
                data.as_os_str(),
                "--noise-std".as_ref(),
                "2e-5".as_ref(),
                "--seed".as_ref(),
                "5".as_ref(),
            ],
            vec![
                "identify".as_ref(),
                data.as_os_str(),
                "--output".as_ref(),
                report.as_os_str(),
            ],
        ];
        for args in steps {
            let status = Command::new(bin)
                .args(&args)
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("{:?} exited with {status}", args[0]));
            }
        }
        std::fs::read(&report).map_err(|e| e.to_string())
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    match (run(a.path()), run(b.path())) {
        (Ok(x), Ok(y)) => outcome(
            x == y,
            format!(
                "two runs, {} and {} report bytes, identical: {}",
                x.len(),
                y.len(),
                x == y
            ),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 spine conversion", spine_conversion()));
    results.push((
        "2 compiled-table lumped algebra",
        compiled_table_consistency(),
    ));
    results.push(("3 noiseless round trip", noiseless_round_trip()));
    let rig = rig_dataset();
    results.push(("4 rig round trip", rig_round_trip(&rig)));
    results.push(("5 model nesting", nesting(&rig)));
    results.push(("6a Toeplitz vs dense least squares", toeplitz_oracle()));
    results.push(("6b impulse response vs ODE", impulse_oracle()));
    let (c, supplement) = zoh_vs_convolution();
    results.push(("6c hold simulation vs convolution", c));
    results.push(("7 sensitivity peaks", sensitivity_peaks()));
    results.push(("8 anti-resonance", anti_resonance()));
    results.push(("9 command-line determinism", determinism()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        if name.starts_with("6c") {
            println!("info 6c supplement: {supplement}");
        }
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
