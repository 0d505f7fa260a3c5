use rustfft::{num_complex::Complex64, FftPlanner};

use super::ImpulseResponseEstimate;
use crate::error::{invalid, Result};
use crate::models::SecondOrderModel;
use crate::signals::{self, correlate_slices, CorrelationVector, Dataset};

/// Deconvolves the input autocorrelation from the input/output
/// cross-correlation, giving `n_taps` impulse-response samples.
pub fn estimate_fir(data: &Dataset, n_taps: usize) -> Result<ImpulseResponseEstimate> {
    estimate_fir_with(data, n_taps, false)
}

pub fn estimate_fir_with(
    data: &Dataset,
    n_taps: usize,
    detrend: bool,
) -> Result<ImpulseResponseEstimate> {
    if n_taps == 0 || n_taps > data.len() {
        return Err(invalid(format!(
            "tap count must lie in 1..={}, got {n_taps}",
            data.len()
        )));
    }
    if !(signals::variance(data.force()) > 0.0) {
        return Err(invalid("force input has zero variance"));
    }
    let owned;
    let data = if detrend {
        owned = data.detrended();
        &owned
    } else {
        data
    };
    let dt = data.dt();
    let r_uu = CorrelationVector {
        dt,
        values: correlate_slices(data.force(), data.force(), n_taps),
    };
    let r_uy = CorrelationVector {
        dt,
        values: correlate_slices(data.force(), data.displacement(), n_taps),
    };
    let taps = signals::toeplitz_solve(&r_uu, &r_uy)?;
    Ok(ImpulseResponseEstimate { dt, taps })
}

/// Score of the FIR predictor on `data`.
pub fn nonparametric_vaf(data: &Dataset, h: &ImpulseResponseEstimate) -> Result<f64> {
    if !signals::same_dt(data.dt(), h.dt) {
        return Err(invalid(format!(
            "estimate interval {} does not match dataset interval {}",
            h.dt,
            data.dt()
        )));
    }
    if h.taps.is_empty() {
        return Err(invalid("impulse response has no taps"));
    }
    let predicted = signals::convolve_slices(data.force(), &h.taps, h.dt);
    signals::vaf_slices(data.displacement(), &predicted)
}

const FALLBACK_ZETA: f64 = 0.3;

/// Starting point for the parametric fit, read off the FIR estimate.
///
/// * frequency from the strongest non-DC bin of the taps' spectrum;
/// * damping from the logarithmic decrement between the largest tap in the
///   first period and the largest tap one period later;
/// * gain as the tap integral.
pub fn initial_guess(h: &ImpulseResponseEstimate) -> Result<SecondOrderModel> {
    let m = h.taps.len();
    if h.taps.iter().all(|&v| v == 0.0) {
        return Err(invalid("impulse response is identically zero"));
    }
    if !(h.dt > 0.0) {
        return Err(invalid("sample interval must be positive"));
    }

    let bin = if m < 2 {
        1
    } else {
        let mut spectrum: Vec<Complex64> = h.taps.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(m).process(&mut spectrum);
        (1..=m / 2)
            .fold((1, f64::NEG_INFINITY), |(bk, bv), k| {
                let v = spectrum[k].norm();
                if v > bv {
                    (k, v)
                } else {
                    (bk, bv)
                }
            })
            .0
    };
    let omega = 2.0 * std::f64::consts::PI * bin as f64 / (m as f64 * h.dt);
    let zeta = log_decrement_zeta(&h.taps, m as f64 / bin as f64).unwrap_or(FALLBACK_ZETA);

    let mut gain = h.dt * h.taps.iter().sum::<f64>();
    if !(gain.is_finite() && gain != 0.0) {
        gain = h.dt * h.taps.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    }
    SecondOrderModel::no_zero(gain, zeta, omega)
}

fn argmax(x: &[f64]) -> usize {
    x.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| {
            if v > bv {
                (i, v)
            } else {
                (bi, bv)
            }
        })
        .0
}

fn log_decrement_zeta(taps: &[f64], period: f64) -> Option<f64> {
    let m = taps.len();
    let p = period.ceil() as usize;
    if p == 0 || p > m {
        return None;
    }
    let i1 = argmax(&taps[..p]);
    let lo = i1 + (period / 2.0).ceil() as usize;
    let hi = i1 + (1.5 * period).ceil() as usize;
    if hi > m || lo >= hi {
        return None;
    }
    let p1 = taps[i1];
    let p2 = taps[lo + argmax(&taps[lo..hi])];
    if !(p1 > 0.0 && p2 > 0.0 && p2 < p1) {
        return None;
    }
    let delta = (p1 / p2).ln();
    let zeta = delta / (4.0 * std::f64::consts::PI.powi(2) + delta * delta).sqrt();
    Some(zeta.clamp(0.05, 0.95))
}
