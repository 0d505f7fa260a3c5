//! Identification report: a fixed-width table for reading, followed by a
//! JSON section that parses back to the same [`ReportRecord`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{FitResult, LumpedParams, TrialAggregate};
use crate::models::{ModelKind, SecondOrderModel, Zeros};

/// Separates the table from the machine-readable section.
pub const MACHINE_MARKER: &str = "--- machine-readable ---";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFitRecord {
    pub model: ModelKind,
    #[serde(rename = "gain_m_per_N")]
    pub gain_m_per_n: f64,
    pub zeta: f64,
    pub omega_rad_s: f64,
    pub freq_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_freq_rad_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero_damping: Option<f64>,
    pub vaf_percent: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ModelFitRecord {
    pub fn from_fit(fit: &FitResult) -> Self {
        let m = &fit.model;
        let (zero_rad_s, zero_freq_rad_s, zero_damping) = match m.zeros {
            Zeros::None => (None, None, None),
            Zeros::Real { z } => (Some(z), None, None),
            Zeros::Pair { freq, damping } => (None, Some(freq), Some(damping)),
        };
        Self {
            model: m.kind(),
            gain_m_per_n: m.gain,
            zeta: m.zeta,
            omega_rad_s: m.omega,
            freq_hz: m.natural_frequency_hz(),
            zero_rad_s,
            zero_freq_rad_s,
            zero_damping,
            vaf_percent: fit.vaf_percent,
            converged: fit.converged,
            iterations: fit.iterations,
        }
    }

    pub fn to_model(&self) -> Result<SecondOrderModel> {
        let (g, zeta, omega) = (self.gain_m_per_n, self.zeta, self.omega_rad_s);
        let missing = || Error::InvalidArgument(format!("{} record lacks its zero", self.model));
        match self.model {
            ModelKind::NoZero => SecondOrderModel::no_zero(g, zeta, omega),
            ModelKind::OneZero => {
                SecondOrderModel::one_zero(g, zeta, omega, self.zero_rad_s.ok_or_else(missing)?)
            }
            ModelKind::ZeroPair => SecondOrderModel::zero_pair(
                g,
                zeta,
                omega,
                self.zero_freq_rad_s.ok_or_else(missing)?,
                self.zero_damping.ok_or_else(missing)?,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LumpedRecord {
    pub mass_kg: f64,
    #[serde(rename = "damping_Ns_per_m")]
    pub damping_ns_per_m: f64,
    #[serde(rename = "stiffness_N_per_m")]
    pub stiffness_n_per_m: f64,
    pub freq_hz: f64,
    pub zeta: f64,
}

impl LumpedRecord {
    pub fn new(lumped: &LumpedParams, model: &SecondOrderModel) -> Self {
        Self {
            mass_kg: lumped.mass,
            damping_ns_per_m: lumped.damping,
            stiffness_n_per_m: lumped.stiffness,
            freq_hz: model.natural_frequency_hz(),
            zeta: model.zeta,
        }
    }

    pub fn fields(&self) -> [(&'static str, f64); 5] {
        [
            ("freq_hz", self.freq_hz),
            ("zeta", self.zeta),
            ("mass_kg", self.mass_kg),
            ("damping_Ns_per_m", self.damping_ns_per_m),
            ("stiffness_N_per_m", self.stiffness_n_per_m),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub name: String,
    pub samples: usize,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonparametric_vaf_percent: Option<f64>,
    pub fits: Vec<ModelFitRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lumped: Option<LumpedRecord>,
    /// Set when any stage failed for this dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl DatasetReport {
    pub fn fit(&self, kind: ModelKind) -> Option<&ModelFitRecord> {
        self.fits.iter().find(|f| f.model == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub n_taps: usize,
    pub force_scale: f64,
    pub detrend: bool,
    pub models: Vec<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub run: RunSummary,
    pub datasets: Vec<DatasetReport>,
    /// Mean and half-range over the datasets that produced each field.
    pub aggregate: BTreeMap<String, TrialAggregate>,
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"))
}

impl ReportRecord {
    /// Lumped record built from the aggregate means, for comparisons
    /// between runs.
    pub fn mean_lumped(&self) -> Option<LumpedRecord> {
        let get = |k: &str| self.aggregate.get(k).map(|a| a.mean);
        Some(LumpedRecord {
            mass_kg: get("mass_kg")?,
            damping_ns_per_m: get("damping_Ns_per_m")?,
            stiffness_n_per_m: get("stiffness_N_per_m")?,
            freq_hz: get("freq_hz")?,
            zeta: get("zeta")?,
        })
    }

    pub fn to_document(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# identification report");
        let _ = writeln!(
            s,
            "# taps {}  force scale {}  detrend {}",
            self.run.n_taps, self.run.force_scale, self.run.detrend
        );
        s.push('\n');
        let _ = writeln!(
            s,
            "{:<20} {:<10} {:>13} {:>8} {:>12} {:>9} {:>12} {:>5}",
            "dataset",
            "model",
            "gain_m_per_N",
            "zeta",
            "omega_rad_s",
            "freq_hz",
            "vaf_percent",
            "conv"
        );
        for d in &self.datasets {
            if let Some(e) = &d.error {
                let _ = writeln!(s, "{:<20} failed: {e}", d.name);
            }
            for f in &d.fits {
                let _ = writeln!(
                    s,
                    "{:<20} {:<10} {:>13.4e} {:>8.4} {:>12.3} {:>9.3} {:>12.4} {:>5}",
                    d.name,
                    f.model.as_str(),
                    f.gain_m_per_n,
                    f.zeta,
                    f.omega_rad_s,
                    f.freq_hz,
                    f.vaf_percent,
                    if f.converged { "yes" } else { "no" }
                );
            }
            if let Some(v) = d.nonparametric_vaf_percent {
                let _ = writeln!(s, "{:<20} {:<10} {:>57.4}", d.name, "fir", v);
            }
        }
        s.push('\n');
        let _ = writeln!(
            s,
            "{:<20} {:>9} {:>8} {:>9} {:>17} {:>18}",
            "dataset", "freq_hz", "zeta", "mass_kg", "damping_Ns_per_m", "stiffness_N_per_m"
        );
        for d in &self.datasets {
            let l = d.lumped;
            let _ = writeln!(
                s,
                "{:<20} {:>9} {:>8} {:>9} {:>17} {:>18}",
                d.name,
                opt(l.map(|l| l.freq_hz), 2),
                opt(l.map(|l| l.zeta), 3),
                opt(l.map(|l| l.mass_kg), 5),
                opt(l.map(|l| l.damping_ns_per_m), 3),
                opt(l.map(|l| l.stiffness_n_per_m), 1),
            );
        }
        if !self.aggregate.is_empty() {
            s.push('\n');
            let _ = writeln!(s, "aggregate over trials (mean ± half-range)");
            for (k, a) in &self.aggregate {
                let _ = writeln!(s, "  {k:<28} {a:.4}");
            }
        }
        s.push('\n');
        s.push_str(MACHINE_MARKER);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("report serializes"));
        s.push('\n');
        s
    }

    pub fn from_document(text: &str) -> Result<Self> {
        let (marker_line, _) = text
            .lines()
            .enumerate()
            .find(|(_, l)| l.trim() == MACHINE_MARKER)
            .ok_or_else(|| Error::Parse {
                line: text.lines().count().max(1),
                message: "report has no machine-readable section".into(),
            })?;
        let json: String = text
            .lines()
            .skip(marker_line + 1)
            .collect::<Vec<_>>()
            .join("\n");
        serde_json::from_str(&json).map_err(|e| Error::Parse {
            line: marker_line + 1 + e.line(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_document())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_document(&std::fs::read_to_string(path)?)
    }
}
