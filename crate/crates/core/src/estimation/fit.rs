use super::fir::{estimate_fir_with, initial_guess};
use super::lm::{levenberg_marquardt, LmOptions};
use super::{FitResult, DEFAULT_TAPS};
use crate::error::{invalid, Result};
use crate::models::{ModelKind, SecondOrderModel, Zeros};
use crate::signals::{self, Dataset};

/// What the residual compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FitDomain {
    /// Measured displacement against the simulated model output.
    #[default]
    TimeSeries,
    /// FIR taps against the model's discrete impulse response. Much cheaper
    /// per evaluation; VAF is still reported on the full time series.
    ImpulseResponse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    /// Taps for the FIR estimate behind the automatic initial guess (and
    /// behind the impulse-response domain).
    pub n_taps: usize,
    pub domain: FitDomain,
    pub detrend: bool,
    pub lm: LmOptions,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            n_taps: DEFAULT_TAPS,
            domain: FitDomain::TimeSeries,
            detrend: false,
            lm: LmOptions::default(),
        }
    }
}

/// Converts `model` to `kind`, seeding any new zero parameters with the
/// defaults `z = 10 omega` or `zc = 3 omega, xi = 0.3`. Parameters already
/// present are kept.
pub fn promote(model: &SecondOrderModel, kind: ModelKind) -> SecondOrderModel {
    let zeros = match (kind, model.zeros) {
        (ModelKind::NoZero, _) => Zeros::None,
        (ModelKind::OneZero, z @ Zeros::Real { .. }) => z,
        (ModelKind::OneZero, _) => Zeros::Real {
            z: 10.0 * model.omega,
        },
        (ModelKind::ZeroPair, z @ Zeros::Pair { .. }) => z,
        (ModelKind::ZeroPair, _) => Zeros::Pair {
            freq: 3.0 * model.omega,
            damping: 0.3,
        },
    };
    SecondOrderModel { zeros, ..*model }
}

/// Unconstrained coordinates: `G` raw, `zeta`, `omega`, `z`, `zc` by log,
/// `xi` by logit.
fn encode(m: &SecondOrderModel) -> Vec<f64> {
    let mut p = vec![m.gain, m.zeta.ln(), m.omega.ln()];
    match m.zeros {
        Zeros::None => {}
        Zeros::Real { z } => p.push(z.abs().ln()),
        Zeros::Pair { freq, damping } => {
            p.push(freq.ln());
            let d = damping.clamp(1e-9, 1.0 - 1e-9);
            p.push((d / (1.0 - d)).ln());
        }
    }
    p
}

fn decode(kind: ModelKind, zero_sign: f64, p: &[f64]) -> SecondOrderModel {
    let zeros = match kind {
        ModelKind::NoZero => Zeros::None,
        ModelKind::OneZero => Zeros::Real {
            z: zero_sign * p[3].exp(),
        },
        ModelKind::ZeroPair => Zeros::Pair {
            freq: p[3].exp(),
            damping: 1.0 / (1.0 + (-p[4]).exp()),
        },
    };
    SecondOrderModel {
        gain: p[0],
        zeta: p[1].exp(),
        omega: p[2].exp(),
        zeros,
    }
}

/// Response of the hold-discretized model to a unit-area pulse of width
/// `dt`: the discrete counterpart of the impulse response that an FIR
/// estimate converges to.
pub fn pulse_response(model: &SecondOrderModel, dt: f64, n: usize) -> Vec<f64> {
    let disc = model.state_space().discretize_zoh(dt);
    let mut x = [0.0; 2];
    (0..n)
        .map(|k| disc.step(&mut x, if k == 0 { 1.0 / dt } else { 0.0 }))
        .collect()
}

/// Least-squares fit of a second-order model of `kind` to `data`.
///
/// Without `init`, the start comes from [`initial_guess`] on an FIR
/// estimate. An `init` of a different kind is converted with [`promote`].
/// Failing to converge is reported through [`FitResult::converged`].
pub fn fit_parametric(
    data: &Dataset,
    kind: ModelKind,
    init: Option<&SecondOrderModel>,
    opts: &FitOptions,
) -> Result<FitResult> {
    if !(signals::variance(data.displacement()) > 0.0) {
        return Err(invalid("displacement has zero variance"));
    }
    if !(signals::variance(data.force()) > 0.0) {
        return Err(invalid("force has zero variance"));
    }
    let owned;
    let data = if opts.detrend {
        owned = data.detrended();
        &owned
    } else {
        data
    };
    let dt = data.dt();
    let n_taps = opts.n_taps.min(data.len());

    let mut fir = None;
    let start = match init {
        Some(m) => {
            m.validate()?;
            promote(m, kind)
        }
        None => {
            let h = estimate_fir_with(data, n_taps, false)?;
            let guess = initial_guess(&h)?;
            fir = Some(h);
            promote(&guess, kind)
        }
    };
    let zero_sign = match start.zeros {
        Zeros::Real { z } if z < 0.0 => -1.0,
        _ => 1.0,
    };
    let theta0 = encode(&start);

    let report = match opts.domain {
        FitDomain::TimeSeries => {
            let u = data.force();
            let y = data.displacement();
            levenberg_marquardt(
                |p| {
                    let m = decode(kind, zero_sign, p);
                    if m.validate().is_err() {
                        return vec![f64::NAN; y.len()];
                    }
                    let sim = m.state_space().discretize_zoh(dt).simulate(u);
                    y.iter().zip(sim).map(|(a, b)| a - b).collect()
                },
                &theta0,
                &opts.lm,
            )?
        }
        FitDomain::ImpulseResponse => {
            let h = match fir {
                Some(h) => h,
                None => estimate_fir_with(data, n_taps, false)?,
            };
            let taps = h.taps;
            levenberg_marquardt(
                |p| {
                    let m = decode(kind, zero_sign, p);
                    if m.validate().is_err() {
                        return vec![f64::NAN; taps.len()];
                    }
                    let g = pulse_response(&m, dt, taps.len());
                    taps.iter().zip(g).map(|(a, b)| a - b).collect()
                },
                &theta0,
                &opts.lm,
            )?
        }
    };

    let model = decode(kind, zero_sign, &report.theta);
    model.validate()?;
    let predicted = model
        .state_space()
        .discretize_zoh(dt)
        .simulate(data.force());
    let vaf_percent = signals::vaf_slices(data.displacement(), &predicted)?;
    let residual_norm = data
        .displacement()
        .iter()
        .zip(&predicted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        model,
        vaf_percent,
        iterations: report.iterations,
        converged: report.converged,
        residual_norm,
    })
}

/// Fits a richer `kind` starting from already-fitted simpler models and
/// keeps the best by VAF.
///
/// Every seed contributes a start with default zero parameters and a
/// degenerate start whose zeros sit at `1e6 omega`, which reproduces the
/// seed's response; a one-zero seed also gives a zero-pair start matching
/// its first-order numerator term.
pub fn fit_nested(
    data: &Dataset,
    kind: ModelKind,
    seeds: &[&FitResult],
    opts: &FitOptions,
) -> Result<FitResult> {
    if seeds.is_empty() {
        return fit_parametric(data, kind, None, opts);
    }
    let mut starts = Vec::new();
    for seed in seeds {
        let m = seed.model;
        starts.push(promote(&m, kind));
        let far = 1e6 * m.omega;
        let degenerate = match kind {
            ModelKind::NoZero => None,
            ModelKind::OneZero => Some(Zeros::Real { z: far }),
            ModelKind::ZeroPair => Some(Zeros::Pair {
                freq: far,
                damping: 0.3,
            }),
        };
        if let Some(zeros) = degenerate {
            starts.push(SecondOrderModel { zeros, ..m });
        }
        if let (ModelKind::ZeroPair, Zeros::Real { z }) = (kind, m.zeros) {
            if z > 0.0 {
                // 1 + s/z ~ (s^2 + 2 xi zc s + zc^2) / zc^2 with zc = 2 xi z
                let xi = 0.95;
                starts.push(SecondOrderModel {
                    zeros: Zeros::Pair {
                        freq: 2.0 * xi * z,
                        damping: xi,
                    },
                    ..m
                });
            }
        }
    }
    let mut best: Option<FitResult> = None;
    for start in &starts {
        let fit = fit_parametric(data, kind, Some(start), opts)?;
        if best
            .as_ref()
            .is_none_or(|b| fit.vaf_percent > b.vaf_percent)
        {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one start"))
}
