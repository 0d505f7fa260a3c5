//! File formats, batch identification, and the `arrowid` command line.
//!
//! Everything the binary does is reachable from here, so scripts and tests
//! can drive the same code paths without spawning a process.

pub mod io;
pub mod plot;
pub mod report;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use io::{load_command, load_dataset, write_command, write_dataset};
pub use plot::{emit_plot_data, PlotInputs, PlotKind};
pub use report::{DatasetReport, LumpedRecord, ModelFitRecord, ReportRecord, RunSummary};

use crate::error::{invalid, Error, Result};
use crate::estimation::{
    aggregate_trials, compare_conditions, estimate_fir_with, extract_lumped, fit_nested,
    fit_parametric, initial_guess, nonparametric_vaf, sensitivity_sweep, ConditionRecord,
    FitOptions, FitResult, ImpulseResponseEstimate, LumpedParams, SensitivityCurve,
    SensitivityParameter, TrialAggregate, DEFAULT_TAPS,
};
use crate::models::{
    expected_frequency, stiffness_from_static_spine, ModelKind, SecondOrderModel, SpineRating,
};
use crate::rigsim::{simulate_rig, RigConfig};
use crate::signals::{generate_prbs, Dataset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } => EXIT_PARSE,
        Error::NumericalFailure { .. } => EXIT_NUMERICAL,
        _ => EXIT_FAILURE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModelSelection {
    #[default]
    All,
    Only(ModelKind),
}

impl ModelSelection {
    pub fn kinds(self) -> Vec<ModelKind> {
        match self {
            ModelSelection::All => ModelKind::ALL.to_vec(),
            ModelSelection::Only(k) => vec![k],
        }
    }
}

impl FromStr for ModelSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(ModelSelection::All)
        } else {
            s.parse().map(ModelSelection::Only)
        }
    }
}

/// Settings shared by every identification run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_taps: usize,
    pub models: ModelSelection,
    /// Multiplies the force channel before anything else.
    pub force_scale: f64,
    pub detrend: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_taps: DEFAULT_TAPS,
            models: ModelSelection::All,
            force_scale: 1.0,
            detrend: false,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.n_taps == 0 {
            return Err(invalid("tap count must be at least 1"));
        }
        if !(self.force_scale.is_finite() && self.force_scale != 0.0) {
            return Err(invalid(format!(
                "force scale must be finite and non-zero, got {}",
                self.force_scale
            )));
        }
        Ok(())
    }

    /// The dataset as the estimators see it.
    pub fn prepare(&self, data: &Dataset) -> Dataset {
        let scaled = if self.force_scale == 1.0 {
            data.clone()
        } else {
            data.with_force_scale(self.force_scale)
        };
        if self.detrend {
            scaled.detrended()
        } else {
            scaled
        }
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions {
            n_taps: self.n_taps,
            ..FitOptions::default()
        }
    }
}

/// Every stage of one identification, kept for reporting and plotting.
#[derive(Debug)]
pub struct Identification {
    pub data: Dataset,
    pub fir: ImpulseResponseEstimate,
    pub nonparametric_vaf: f64,
    /// Fits of the requested kinds.
    pub fits: Vec<FitResult>,
    /// Always fitted: it seeds the richer kinds and gives the lumped
    /// parameters.
    pub no_zero: FitResult,
    pub lumped: Result<LumpedParams>,
}

impl Identification {
    pub fn fit(&self, kind: ModelKind) -> Option<&FitResult> {
        self.fits.iter().find(|f| f.model.kind() == kind)
    }
}

/// FIR estimate, initial guess, and a fit per requested kind. Richer kinds
/// start from the simpler optima, so VAF does not drop going from no-zero
/// to one-zero to zero-pair.
pub fn identify(data: &Dataset, config: &RunConfig) -> Result<Identification> {
    config.validate()?;
    let data = config.prepare(data);
    let kinds = config.models.kinds();
    let opts = config.fit_options();

    let fir = estimate_fir_with(&data, config.n_taps.min(data.len()), false)?;
    let nonparametric_vaf = nonparametric_vaf(&data, &fir)?;
    let guess = initial_guess(&fir)?;
    let no_zero = fit_parametric(&data, ModelKind::NoZero, Some(&guess), &opts)?;
    let one_zero = if kinds.iter().any(|k| *k != ModelKind::NoZero) {
        Some(fit_nested(&data, ModelKind::OneZero, &[&no_zero], &opts)?)
    } else {
        None
    };
    let zero_pair = if kinds.contains(&ModelKind::ZeroPair) {
        let mut seeds = vec![&no_zero];
        seeds.extend(one_zero.as_ref());
        Some(fit_nested(&data, ModelKind::ZeroPair, &seeds, &opts)?)
    } else {
        None
    };
    let lumped = extract_lumped(&no_zero.model);

    let fits = [Some(no_zero.clone()), one_zero, zero_pair]
        .into_iter()
        .flatten()
        .filter(|f| kinds.contains(&f.model.kind()))
        .collect();
    Ok(Identification {
        data,
        fir,
        nonparametric_vaf,
        fits,
        no_zero,
        lumped,
    })
}

fn report_dataset(
    name: &str,
    data: &Dataset,
    config: &RunConfig,
) -> (DatasetReport, Option<Error>) {
    let mut rep = DatasetReport {
        name: name.to_string(),
        samples: data.len(),
        dt: data.dt(),
        nonparametric_vaf_percent: None,
        fits: Vec::new(),
        lumped: None,
        error: None,
    };
    match identify(data, config) {
        Ok(id) => {
            rep.nonparametric_vaf_percent = Some(id.nonparametric_vaf);
            rep.fits = id.fits.iter().map(ModelFitRecord::from_fit).collect();
            match &id.lumped {
                Ok(l) => rep.lumped = Some(LumpedRecord::new(l, &id.no_zero.model)),
                Err(e) => rep.error = Some(format!("lumped parameters: {e}")),
            }
            (rep, None)
        }
        Err(e) => {
            rep.error = Some(e.to_string());
            (rep, Some(e))
        }
    }
}

fn aggregate(datasets: &[DatasetReport]) -> Result<BTreeMap<String, TrialAggregate>> {
    let mut fields: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for d in datasets {
        if let Some(l) = &d.lumped {
            for (k, v) in l.fields() {
                fields.entry(k.to_string()).or_default().push(v);
            }
        }
        for f in &d.fits {
            fields
                .entry(format!("vaf_percent.{}", f.model))
                .or_default()
                .push(f.vaf_percent);
        }
        if let Some(v) = d.nonparametric_vaf_percent {
            fields.entry("vaf_percent.fir".into()).or_default().push(v);
        }
    }
    fields
        .into_iter()
        .map(|(k, v)| Ok((k, aggregate_trials(&v)?)))
        .collect()
}

/// Identifies every dataset (in parallel) and aggregates across them. The
/// second element holds the errors of datasets that failed, which are also
/// recorded in the report.
pub fn run_identify_detailed(
    datasets: &[(String, Dataset)],
    config: &RunConfig,
) -> Result<(ReportRecord, Vec<Error>)> {
    if datasets.is_empty() {
        return Err(invalid("no datasets to identify"));
    }
    config.validate()?;
    let results: Vec<(DatasetReport, Option<Error>)> = datasets
        .par_iter()
        .map(|(name, data)| report_dataset(name, data, config))
        .collect();
    let mut reports = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for (r, e) in results {
        reports.push(r);
        errors.extend(e);
    }
    let record = ReportRecord {
        run: RunSummary {
            n_taps: config.n_taps,
            force_scale: config.force_scale,
            detrend: config.detrend,
            models: config.models.kinds(),
        },
        aggregate: aggregate(&reports)?,
        datasets: reports,
    };
    Ok((record, errors))
}

pub fn run_identify(datasets: &[(String, Dataset)], config: &RunConfig) -> Result<ReportRecord> {
    run_identify_detailed(datasets, config).map(|(r, _)| r)
}

/// Stiffness for a spine rating and, given a lumped mass, the expected
/// natural frequency in Hz.
pub fn spine(rating: SpineRating, lumped_mass: Option<f64>) -> Result<(f64, Option<f64>)> {
    let k = stiffness_from_static_spine(rating)?;
    let f = lumped_mass.map(|m| expected_frequency(k, m)).transpose()?;
    Ok((k, f))
}

fn condition_of(report: &ReportRecord, path: &Path) -> Result<ConditionRecord> {
    let l = report
        .mean_lumped()
        .ok_or_else(|| invalid(format!("{} has no lumped parameters", path.display())))?;
    Ok(ConditionRecord {
        freq_hz: l.freq_hz,
        zeta: l.zeta,
        lumped: LumpedParams {
            mass: l.mass_kg,
            damping: l.damping_ns_per_m,
            stiffness: l.stiffness_n_per_m,
        },
    })
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Debug, Parser)]
#[command(
    name = "arrowid",
    version,
    about = "Identify second-order shaft dynamics from force/displacement records"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random binary command voltage.
    GenInput(GenInputArgs),
    /// Run the software rig on a command voltage and write the dataset.
    Simulate(SimulateArgs),
    /// Fit models to one or more datasets and write a report.
    Identify(IdentifyArgs),
    /// Single-parameter VAF sweeps around the fitted model.
    Sensitivity(SensitivityArgs),
    /// Convert a static spine rating to stiffness.
    Spine(SpineArgs),
    /// Per-field change between two identification reports.
    Compare(CompareArgs),
    /// Write one CSV series for plotting.
    PlotData(PlotDataArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// FIR length for the non-parametric estimate.
    #[arg(long, default_value_t = DEFAULT_TAPS)]
    pub taps: usize,
    /// no-zero, one-zero, zero-pair or all.
    #[arg(long, default_value = "all")]
    pub model: ModelSelection,
    /// Factor applied to the force channel before fitting.
    #[arg(long, default_value_t = 1.0)]
    pub force_scale: f64,
    /// Remove the mean of both channels first.
    #[arg(long)]
    pub detrend: bool,
}

impl FitArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            n_taps: self.taps,
            models: self.model,
            force_scale: self.force_scale,
            detrend: self.detrend,
        }
    }

    /// The one model kind a single-model command works on; `all` means
    /// no-zero.
    fn single_kind(&self) -> ModelKind {
        match self.model {
            ModelSelection::All => ModelKind::NoZero,
            ModelSelection::Only(k) => k,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenInputArgs {
    #[arg(long)]
    pub output: PathBuf,
    /// Seconds.
    #[arg(long, default_value_t = 30.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 4000.0)]
    pub sample_rate: f64,
    /// Volts.
    #[arg(long, default_value_t = 3.0)]
    pub amplitude: f64,
    /// Samples per level before a new coin flip.
    #[arg(long, default_value_t = 1)]
    pub hold: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Command voltage CSV (`t,voltage_V`).
    #[arg(long)]
    pub command: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Plant DC gain, m/N.
    #[arg(long, default_value_t = 2.64e-4)]
    pub gain: f64,
    #[arg(long, default_value_t = 0.285)]
    pub zeta: f64,
    /// rad/s.
    #[arg(long, default_value_t = 239.16)]
    pub omega: f64,
    /// Real zero location, rad/s (one-zero plant).
    #[arg(long, conflicts_with = "zero_freq")]
    pub zero: Option<f64>,
    /// Zero-pair frequency, rad/s.
    #[arg(long, requires = "zero_damping")]
    pub zero_freq: Option<f64>,
    #[arg(long, requires = "zero_freq")]
    pub zero_damping: Option<f64>,
    /// Displacement noise standard deviation, m.
    #[arg(long, default_value_t = 0.0)]
    pub noise_std: f64,
    /// Encoder resolution, m (0 disables).
    #[arg(long, default_value_t = 1e-5)]
    pub quantization: f64,
    /// Force-channel filter corner, Hz.
    #[arg(long, default_value_t = 2000.0)]
    pub filter_knee: f64,
    #[arg(long)]
    pub no_filter: bool,
    /// Switch off every rig non-ideality.
    #[arg(long)]
    pub idealized: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SimulateArgs {
    fn plant(&self) -> Result<SecondOrderModel> {
        match (self.zero, self.zero_freq, self.zero_damping) {
            (Some(z), _, _) => SecondOrderModel::one_zero(self.gain, self.zeta, self.omega, z),
            (None, Some(f), Some(d)) => {
                SecondOrderModel::zero_pair(self.gain, self.zeta, self.omega, f, d)
            }
            _ => SecondOrderModel::no_zero(self.gain, self.zeta, self.omega),
        }
    }

    pub fn rig_config(&self) -> Result<RigConfig> {
        let plant = self.plant()?;
        let mut cfg = if self.idealized {
            RigConfig::idealized(plant)
        } else {
            let mut c = RigConfig::new(plant);
            c.quantization_step = self.quantization;
            c.filter_knee = (!self.no_filter).then_some(self.filter_knee);
            c
        };
        cfg.displacement_noise_std = self.noise_std;
        cfg.seed = self.seed;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct IdentifyArgs {
    /// Dataset CSV files (`t,force_N,disp_m`); several are treated as trials.
    #[arg(required = true)]
    pub datasets: Vec<PathBuf>,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    pub dataset: PathBuf,
    /// Parameter to sweep; every parameter of the model when omitted.
    #[arg(long)]
    pub parameter: Option<SensitivityParameter>,
    /// Half-width of the sweep relative to the fitted value.
    #[arg(long, default_value_t = 0.2)]
    pub range: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitArgs,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("rating").required(true).args(["spine", "deflection"])))]
pub struct SpineArgs {
    /// Spine number (thousandths of an inch of deflection).
    #[arg(long)]
    pub spine: Option<f64>,
    /// Deflection, m.
    #[arg(long)]
    pub deflection: Option<f64>,
    /// Lumped mass, kg, for the expected natural frequency.
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub before: PathBuf,
    pub after: PathBuf,
    /// JSON output path.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotDataArgs {
    pub dataset: PathBuf,
    /// impulse, prediction, bode, polezero or sensitivity.
    #[arg(long)]
    pub what: PlotKind,
    #[arg(long)]
    pub output: PathBuf,
    /// Points on the Bode frequency grid (1 to 10^4 rad/s).
    #[arg(long, default_value_t = 400)]
    pub bode_points: usize,
    #[arg(long, default_value_t = 0.2)]
    pub range: f64,
    #[arg(long, default_value_t = 21)]
    pub points: usize,
    #[command(flatten)]
    pub fit: FitArgs,
}

fn dataset_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn sweeps(
    data: &Dataset,
    fit: &FitResult,
    only: Option<SensitivityParameter>,
    range: f64,
    points: usize,
) -> Result<Vec<SensitivityCurve>> {
    let params = match only {
        Some(p) => vec![p],
        None => fit.model.parameters().to_vec(),
    };
    params
        .into_iter()
        .map(|p| sensitivity_sweep(data, fit, p, range, points))
        .collect()
}

fn single_fit(path: &Path, args: &FitArgs) -> Result<(Identification, FitResult)> {
    let data = load_dataset(path)?;
    let kind = args.single_kind();
    let config = RunConfig {
        models: ModelSelection::Only(kind),
        ..args.config()
    };
    let id = identify(&data, &config)?;
    let fit = id.fit(kind).cloned().expect("requested kind is fitted");
    Ok((id, fit))
}

/// Executes one parsed command; normal output goes to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::GenInput(a) => {
            if !(a.duration > 0.0 && a.sample_rate > 0.0) {
                return Err(invalid("duration and sample rate must be positive"));
            }
            let n = (a.duration * a.sample_rate).round() as usize;
            let cmd = generate_prbs(n, a.amplitude, a.hold, a.seed, 1.0 / a.sample_rate)?;
            write_command(&a.output, &cmd)?;
        }
        Command::Simulate(a) => {
            let cfg = a.rig_config()?;
            let cmd = load_command(&a.command)?;
            let sim = simulate_rig(&cfg, &cmd)?;
            write_dataset(&a.output, &sim.dataset)?;
        }
        Command::Identify(a) => {
            let datasets = a
                .datasets
                .iter()
                .map(|p| Ok((dataset_name(p), load_dataset(p)?)))
                .collect::<Result<Vec<_>>>()?;
            let (report, mut errors) = run_identify_detailed(&datasets, &a.fit.config())?;
            match &a.output {
                Some(p) => report.write(p)?,
                None => out.write_all(report.to_document().as_bytes())?,
            }
            if errors.len() == datasets.len() {
                return Err(errors.remove(0));
            }
            for d in &report.datasets {
                if let Some(e) = &d.error {
                    eprintln!("warning: {}: {e}", d.name);
                }
            }
        }
        Command::Sensitivity(a) => {
            let (id, fit) = single_fit(&a.dataset, &a.fit)?;
            let curves = sweeps(&id.data, &fit, a.parameter, a.range, a.points)?;
            let inputs = PlotInputs {
                sensitivity: &curves,
                ..Default::default()
            };
            let text = plot::plot_series(PlotKind::Sensitivity, &inputs)?;
            match &a.output {
                Some(p) => std::fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Spine(a) => {
            let rating = match (a.spine, a.deflection) {
                (Some(s), _) => SpineRating::from_spine_number(s)?,
                (None, Some(d)) => SpineRating::new(d)?,
                (None, None) => return Err(invalid("give --spine or --deflection")),
            };
            let (k, f) = spine(rating, a.mass)?;
            writeln!(out, "deflection_m {}", rating.deflection)?;
            writeln!(out, "stiffness_N_per_m {k:.1}")?;
            if let Some(f) = f {
                writeln!(out, "expected_freq_hz {f:.2}")?;
            }
        }
        Command::Compare(a) => {
            let before = condition_of(&ReportRecord::load(&a.before)?, &a.before)?;
            let after = condition_of(&ReportRecord::load(&a.after)?, &a.after)?;
            let cmp = compare_conditions(&before, &after);
            writeln!(
                out,
                "{:<20} {:>12} {:>12} {:>12} {:>9}",
                "field", "before", "after", "delta", "change_%"
            )?;
            for (name, d) in cmp.fields() {
                writeln!(
                    out,
                    "{:<20} {:>12.4} {:>12.4} {:>+12.4} {:>+9.1}",
                    name,
                    d.before,
                    d.after,
                    d.delta,
                    100.0 * d.relative
                )?;
            }
            if let Some(p) = &a.output {
                let json = serde_json::to_string_pretty(&cmp)
                    .map_err(|e| invalid(format!("comparison does not serialize: {e}")))?;
                std::fs::write(p, json + "\n")?;
            }
        }
        Command::PlotData(a) => {
            let (id, fit) = single_fit(&a.dataset, &a.fit)?;
            let grid = plot::log_grid(1.0, 1e4, a.bode_points.max(1));
            let curves = if a.what == PlotKind::Sensitivity {
                sweeps(&id.data, &fit, None, a.range, a.points)?
            } else {
                Vec::new()
            };
            let inputs = PlotInputs {
                data: Some(&id.data),
                fit: Some(&fit),
                fir: Some(&id.fir),
                sensitivity: &curves,
                bode_grid: Some(&grid),
            };
            emit_plot_data(a.what, &inputs, &a.output)?;
        }
    }
    Ok(())
}

/// Parses `args`, runs the command, and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
