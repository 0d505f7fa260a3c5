//! Excitation, correlation and deconvolution primitives.
//!
//! Impulse-response taps are samples of a continuous-time response, so
//! every discrete convolution here carries an explicit `dt` factor:
//! `y[n] = dt * sum_k h[k] u[n - k]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

/// Tikhonov weight added to the Toeplitz diagonal, relative to `r_uu[0]`.
pub const TOEPLITZ_REGULARIZATION: f64 = 1e-8;

/// Uniformly sampled real signal.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    dt: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!(
                "sample interval must be positive, got {dt}"
            )));
        }
        if values.is_empty() {
            return Err(invalid("time series must have at least one sample"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("sample {i} is not finite")));
        }
        Ok(Self { dt, values })
    }

    pub(crate) fn from_parts_unchecked(dt: f64, values: Vec<f64>) -> Self {
        Self { dt, values }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    /// Copy with the sample mean removed.
    pub fn detrended(&self) -> Self {
        let m = self.mean();
        Self {
            dt: self.dt,
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dt: self.dt,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Sample instants `n * dt`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |n| n as f64 * self.dt)
    }
}

/// Paired force input and displacement output record.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dt: f64,
    force: Vec<f64>,
    displacement: Vec<f64>,
}

impl Dataset {
    pub fn new(dt: f64, force: Vec<f64>, displacement: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!(
                "sample interval must be positive, got {dt}"
            )));
        }
        if force.len() != displacement.len() {
            return Err(invalid(format!(
                "force has {} samples but displacement has {}",
                force.len(),
                displacement.len()
            )));
        }
        if force.len() < 2 {
            return Err(invalid("dataset needs at least two samples"));
        }
        if force.iter().chain(&displacement).any(|v| !v.is_finite()) {
            return Err(invalid("dataset contains non-finite samples"));
        }
        Ok(Self {
            dt,
            force,
            displacement,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.force.len()
    }

    pub fn is_empty(&self) -> bool {
        self.force.is_empty()
    }

    pub fn force(&self) -> &[f64] {
        &self.force
    }

    pub fn displacement(&self) -> &[f64] {
        &self.displacement
    }

    pub fn force_series(&self) -> TimeSeries {
        TimeSeries::from_parts_unchecked(self.dt, self.force.clone())
    }

    pub fn displacement_series(&self) -> TimeSeries {
        TimeSeries::from_parts_unchecked(self.dt, self.displacement.clone())
    }

    /// Multiplies the force channel, e.g. to convert a sensed voltage.
    pub fn with_force_scale(&self, scale: f64) -> Self {
        Self {
            dt: self.dt,
            force: self.force.iter().map(|f| f * scale).collect(),
            displacement: self.displacement.clone(),
        }
    }

    /// Both channels with their means removed.
    pub fn detrended(&self) -> Self {
        let mf = mean(&self.force);
        let md = mean(&self.displacement);
        Self {
            dt: self.dt,
            force: self.force.iter().map(|v| v - mf).collect(),
            displacement: self.displacement.iter().map(|v| v - md).collect(),
        }
    }
}

/// Biased sample correlation `r[k] = (1/N) sum_n x[n] y[n+k]` for lags
/// `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationVector {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl CorrelationVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Two-level random excitation.
///
/// The level is drawn by a fair coin at the start of every block of
/// `hold_samples` samples, so a switch can only happen at block boundaries.
pub fn generate_prbs(
    num_samples: usize,
    amplitude: f64,
    hold_samples: usize,
    seed: u64,
    dt: f64,
) -> Result<TimeSeries> {
    if num_samples == 0 || hold_samples == 0 {
        return Err(invalid("sample and hold counts must be at least 1"));
    }
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(invalid(format!(
            "amplitude must be positive, got {amplitude}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level = amplitude;
    let values = (0..num_samples)
        .map(|n| {
            if n % hold_samples == 0 {
                level = if rng.random::<bool>() {
                    amplitude
                } else {
                    -amplitude
                };
            }
            level
        })
        .collect();
    TimeSeries::new(dt, values)
}

pub(crate) fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub(crate) fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
}

pub(crate) fn correlate_slices(x: &[f64], y: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let scale = 1.0 / n as f64;
    (0..max_lag)
        .map(|k| {
            let s: f64 = x[..n - k].iter().zip(&y[k..]).map(|(a, b)| a * b).sum();
            s * scale
        })
        .collect()
}

/// Biased cross-correlation of `x` against `y` for lags `0..max_lag`.
pub fn correlation(x: &TimeSeries, y: &TimeSeries, max_lag: usize) -> Result<CorrelationVector> {
    check_pair(x, y)?;
    if max_lag == 0 || max_lag > x.len() {
        return Err(invalid(format!(
            "max_lag must lie in 1..={}, got {max_lag}",
            x.len()
        )));
    }
    Ok(CorrelationVector {
        dt: x.dt,
        values: correlate_slices(&x.values, &y.values, max_lag),
    })
}

/// Same as [`correlation`] but with both signals mean-removed first.
pub fn correlation_detrended(
    x: &TimeSeries,
    y: &TimeSeries,
    max_lag: usize,
) -> Result<CorrelationVector> {
    check_pair(x, y)?;
    correlation(&x.detrended(), &y.detrended(), max_lag)
}

fn check_pair(x: &TimeSeries, y: &TimeSeries) -> Result<()> {
    if x.len() != y.len() {
        return Err(invalid(format!(
            "signal lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if !same_dt(x.dt, y.dt) {
        return Err(invalid(format!(
            "sample intervals differ: {} vs {}",
            x.dt, y.dt
        )));
    }
    Ok(())
}

pub(crate) fn same_dt(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs())
}

/// Solves `dt * T(r_uu) h = r_uy` by Levinson recursion, where `T` is the
/// symmetric Toeplitz matrix with first row `r_uu` plus a diagonal load of
/// [`TOEPLITZ_REGULARIZATION`]` * r_uu[0]`.
pub fn toeplitz_solve(r_uu: &CorrelationVector, r_uy: &CorrelationVector) -> Result<Vec<f64>> {
    if r_uu.len() != r_uy.len() || r_uu.is_empty() {
        return Err(invalid(format!(
            "correlation lengths must match and be non-empty: {} vs {}",
            r_uu.len(),
            r_uy.len()
        )));
    }
    if !same_dt(r_uu.dt, r_uy.dt) {
        return Err(invalid("correlation lag spacings differ"));
    }
    let r0 = r_uu.values[0];
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(invalid(format!("r_uu[0] must be positive, got {r0}")));
    }
    let diag = r0 * (1.0 + TOEPLITZ_REGULARIZATION);
    let mut h = levinson(diag, &r_uu.values[1..], &r_uy.values)?;
    let inv_dt = 1.0 / r_uu.dt;
    h.iter_mut().for_each(|v| *v *= inv_dt);
    Ok(h)
}

/// Levinson recursion for a symmetric Toeplitz system with diagonal `t0`
/// and off-diagonals `t[0..n-1]` (first row `[t0, t...]`).
fn levinson(t0: f64, t: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let r: Vec<f64> = t.iter().map(|v| v / t0).collect();
    let b: Vec<f64> = b.iter().map(|v| v / t0).collect();

    let mut x = vec![0.0; n];
    x[0] = b[0];
    if n == 1 {
        return Ok(x);
    }
    // y solves the Yule-Walker system T_k y = -r[..k].
    let mut y = vec![0.0; n];
    y[0] = -r[0];
    let mut alpha = -r[0];
    let mut beta = 1.0;
    let mut beta_min = 1.0f64;
    let mut scratch = vec![0.0; n];

    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        beta_min = beta_min.min(beta);
        if !(beta > 1e-14) {
            return Err(Error::NumericalFailure {
                message: format!("Toeplitz matrix is singular at order {k}"),
                condition: 1.0 / beta.max(f64::MIN_POSITIVE),
            });
        }
        let dot: f64 = (0..k).map(|i| r[i] * x[k - 1 - i]).sum();
        let mu = (b[k] - dot) / beta;
        for i in 0..k {
            scratch[i] = x[i] + mu * y[k - 1 - i];
        }
        x[..k].copy_from_slice(&scratch[..k]);
        x[k] = mu;

        if k < n - 1 {
            let dot: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
            alpha = -(r[k] + dot) / beta;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure {
            message: "Toeplitz solution is not finite".into(),
            condition: 1.0 / beta_min,
        });
    }
    Ok(x)
}

pub(crate) fn convolve_slices(u: &[f64], h: &[f64], dt: f64) -> Vec<f64> {
    let m = h.len();
    (0..u.len())
        .map(|n| {
            let kmax = n.min(m - 1);
            let s: f64 = h[..=kmax]
                .iter()
                .zip(u[n - kmax..=n].iter().rev())
                .map(|(a, b)| a * b)
                .sum();
            dt * s
        })
        .collect()
}

/// Truncated causal convolution `y[n] = dt * sum_{k<=min(n, M-1)} h[k] u[n-k]`.
pub fn convolve(u: &TimeSeries, h: &[f64], dt: f64) -> Result<TimeSeries> {
    if h.is_empty() {
        return Err(invalid("impulse response must have at least one tap"));
    }
    if !same_dt(u.dt, dt) {
        return Err(invalid(format!(
            "tap spacing {dt} does not match signal interval {}",
            u.dt
        )));
    }
    Ok(TimeSeries::from_parts_unchecked(
        u.dt,
        convolve_slices(&u.values, h, dt),
    ))
}

pub(crate) fn vaf_slices(measured: &[f64], predicted: &[f64]) -> Result<f64> {
    if measured.len() != predicted.len() {
        return Err(invalid(format!(
            "VAF inputs differ in length: {} vs {}",
            measured.len(),
            predicted.len()
        )));
    }
    if measured.len() < 2 {
        return Err(invalid("VAF needs at least two samples"));
    }
    let var_m = variance(measured);
    if !(var_m > 0.0) {
        return Err(invalid("measured signal has zero variance"));
    }
    let err: Vec<f64> = measured.iter().zip(predicted).map(|(m, p)| m - p).collect();
    Ok(100.0 * (1.0 - variance(&err) / var_m))
}

/// Variance accounted for, in percent.
pub fn vaf(measured: &TimeSeries, predicted: &TimeSeries) -> Result<f64> {
    vaf_slices(&measured.values, &predicted.values)
}
