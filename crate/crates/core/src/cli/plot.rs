//! CSV series behind the usual identification figures. Rendering is left
//! to whatever plotting tool reads the files.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::estimation::{pulse_response, FitResult, ImpulseResponseEstimate, SensitivityCurve};
use crate::models::{bode, transfer_function};
use crate::signals::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlotKind {
    /// FIR estimate next to the fitted model's impulse response.
    Impulse,
    /// Measured displacement next to the fitted model's prediction.
    Prediction,
    Bode,
    PoleZero,
    Sensitivity,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::Impulse,
        PlotKind::Prediction,
        PlotKind::Bode,
        PlotKind::PoleZero,
        PlotKind::Sensitivity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlotKind::Impulse => "impulse",
            PlotKind::Prediction => "prediction",
            PlotKind::Bode => "bode",
            PlotKind::PoleZero => "polezero",
            PlotKind::Sensitivity => "sensitivity",
        }
    }
}

impl std::fmt::Display for PlotKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown plot series `{s}`")))
    }
}

/// Whatever an identification run produced; each series needs a subset.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlotInputs<'a> {
    pub data: Option<&'a Dataset>,
    pub fit: Option<&'a FitResult>,
    pub fir: Option<&'a ImpulseResponseEstimate>,
    pub sensitivity: &'a [SensitivityCurve],
    /// Frequencies for the Bode series; defaults to [`default_bode_grid`].
    pub bode_grid: Option<&'a [f64]>,
}

/// 400 log-spaced points from 1 to 10^4 rad/s.
pub fn default_bode_grid() -> Vec<f64> {
    log_grid(1.0, 1e4, 400)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn need<T>(v: Option<T>, what: &str, series: PlotKind) -> Result<T> {
    v.ok_or_else(|| invalid(format!("{series} series needs {what}")))
}

pub fn plot_series(what: PlotKind, inputs: &PlotInputs<'_>) -> Result<String> {
    let mut s = String::new();
    match what {
        PlotKind::Impulse => {
            let fir = need(inputs.fir, "an FIR estimate", what)?;
            let fit = need(inputs.fit, "a fitted model", what)?;
            let model = pulse_response(&fit.model, fir.dt, fir.taps.len());
            s.push_str("t,estimate,fit\n");
            for (k, (e, m)) in fir.taps.iter().zip(&model).enumerate() {
                let _ = writeln!(s, "{},{e},{m}", k as f64 * fir.dt);
            }
        }
        PlotKind::Prediction => {
            let data = need(inputs.data, "a dataset", what)?;
            let fit = need(inputs.fit, "a fitted model", what)?;
            let predicted = fit
                .model
                .state_space()
                .discretize_zoh(data.dt())
                .simulate(data.force());
            s.push_str("t,measured,predicted\n");
            for (k, (y, p)) in data.displacement().iter().zip(&predicted).enumerate() {
                let _ = writeln!(s, "{},{y},{p}", k as f64 * data.dt());
            }
        }
        PlotKind::Bode => {
            let fit = need(inputs.fit, "a fitted model", what)?;
            let owned;
            let grid = match inputs.bode_grid {
                Some(g) => g,
                None => {
                    owned = default_bode_grid();
                    &owned
                }
            };
            s.push_str("freq_rad_s,magnitude,phase_rad\n");
            for (w, (mag, phase)) in grid.iter().zip(bode(&fit.model, grid)?) {
                let _ = writeln!(s, "{w},{mag},{phase}");
            }
        }
        PlotKind::PoleZero => {
            let fit = need(inputs.fit, "a fitted model", what)?;
            let tf = transfer_function(&fit.model)?;
            s.push_str("kind,re,im\n");
            for p in tf.poles {
                let _ = writeln!(s, "pole,{},{}", p.re, p.im);
            }
            for z in tf.zeros {
                let _ = writeln!(s, "zero,{},{}", z.re, z.im);
            }
        }
        PlotKind::Sensitivity => {
            if inputs.sensitivity.is_empty() {
                return Err(invalid("sensitivity series needs at least one sweep"));
            }
            s.push_str("parameter,value,vaf_percent\n");
            for c in inputs.sensitivity {
                for (v, vaf) in c.grid.iter().zip(&c.vaf) {
                    let _ = writeln!(s, "{},{v},{vaf}", c.parameter);
                }
            }
        }
    }
    Ok(s)
}

pub fn emit_plot_data(
    what: PlotKind,
    inputs: &PlotInputs<'_>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let text = plot_series(what, inputs)?;
    Ok(std::fs::write(path, text)?)
}
