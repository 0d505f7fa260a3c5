//! Non-parametric and parametric identification from force/displacement
//! records, plus the lumped-parameter arithmetic used for reporting.

mod fir;
mod fit;
pub mod lm;
mod lumped;
mod sensitivity;

use serde::{Deserialize, Serialize};

pub use fir::{estimate_fir, estimate_fir_with, initial_guess, nonparametric_vaf};
pub use fit::{fit_nested, fit_parametric, promote, pulse_response, FitDomain, FitOptions};
pub use lumped::{
    aggregate_trials, compare_conditions, extract_lumped, ConditionComparison, ConditionRecord,
    FieldDelta,
};
pub use sensitivity::sensitivity_sweep;

pub use crate::models::Parameter as SensitivityParameter;
use crate::models::SecondOrderModel;

/// FIR taps per the default non-parametric model.
pub const DEFAULT_TAPS: usize = 1501;

/// Sampled impulse response, m/(N s).
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponseEstimate {
    pub dt: f64,
    pub taps: Vec<f64>,
}

impl ImpulseResponseEstimate {
    /// Response duration covered by the taps, seconds.
    pub fn span(&self) -> f64 {
        self.taps.len() as f64 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: SecondOrderModel,
    pub vaf_percent: f64,
    pub iterations: usize,
    pub converged: bool,
    pub residual_norm: f64,
}

/// Equivalent single-mode mass (kg), damping (N s/m) and stiffness (N/m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LumpedParams {
    pub mass: f64,
    pub damping: f64,
    pub stiffness: f64,
}

impl LumpedParams {
    /// `sqrt(K / M)`, rad/s.
    pub fn natural_frequency(&self) -> f64 {
        (self.stiffness / self.mass).sqrt()
    }

    /// `B / (2 sqrt(K M))`.
    pub fn damping_ratio(&self) -> f64 {
        self.damping / (2.0 * (self.stiffness * self.mass).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityCurve {
    pub parameter: SensitivityParameter,
    pub grid: Vec<f64>,
    pub vaf: Vec<f64>,
}

impl SensitivityCurve {
    /// Index of the largest VAF (first on ties).
    pub fn peak_index(&self) -> usize {
        self.vaf
            .iter()
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
}

/// Mean and half of the max/min spread over repeated trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialAggregate {
    pub mean: f64,
    pub half_range: f64,
}

impl std::fmt::Display for TrialAggregate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match f.precision() {
            Some(p) => write!(f, "{:.p$} ± {:.p$}", self.mean, self.half_range),
            None => write!(f, "{} ± {}", self.mean, self.half_range),
        }
    }
}
