//! Software stand-in for the voice-coil test rig.
//!
//! A command voltage (the duty-cycle average of the PWM drive) is applied to
//! the coil. The coil current obeys `L di/dt = v - R i - Kf dy/dt`, the plant
//! is driven by `F = Kf i`, and two measurement chains are modelled: the
//! force channel through a double-pole RC filter, and the displacement
//! encoder with additive noise and finite resolution.
//!
//! Integration runs on a grid `oversample` times finer than the sampling
//! rate. The current is advanced by classical RK4 with the plant velocity
//! frozen over the substep; the plant is advanced by its exact hold
//! discretization under the substep-average force.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::models::SecondOrderModel;
use crate::signals::{same_dt, Dataset, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct RigConfig {
    /// Ground-truth force-to-displacement dynamics.
    pub plant: SecondOrderModel,
    pub supply_voltage: f64,
    pub coil_resistance: f64,
    /// Zero makes the current an algebraic function of voltage and velocity.
    pub coil_inductance: f64,
    /// N/A, also the back-EMF constant in V s/m.
    pub force_constant: f64,
    pub back_emf: bool,
    /// Volts at the ADC per ampere of coil current.
    pub sense_conversion: f64,
    /// `None` bypasses the measurement filter.
    pub filter_knee: Option<f64>,
    pub sample_rate: f64,
    pub oversample: usize,
    pub quantization_step: f64,
    pub force_limit: Option<f64>,
    pub travel_limit: Option<f64>,
    pub displacement_noise_std: f64,
    pub seed: u64,
}

impl RigConfig {
    pub fn new(plant: SecondOrderModel) -> Self {
        Self {
            plant,
            supply_voltage: 25.2,
            coil_resistance: 5.3,
            coil_inductance: 1e-3,
            force_constant: 10.0,
            back_emf: true,
            sense_conversion: 0.36,
            filter_knee: Some(2000.0),
            sample_rate: 4000.0,
            oversample: 10,
            quantization_step: 1e-5,
            force_limit: Some(89.0),
            travel_limit: Some(3e-3),
            displacement_noise_std: 0.0,
            seed: 0,
        }
    }

    /// Every non-ideal effect switched off: static coil, no back-EMF, no
    /// filter, no clamps, perfect encoder.
    pub fn idealized(plant: SecondOrderModel) -> Self {
        Self {
            coil_inductance: 0.0,
            back_emf: false,
            filter_knee: None,
            quantization_step: 0.0,
            force_limit: None,
            travel_limit: None,
            ..Self::new(plant)
        }
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        let positive = [
            ("supply_voltage", self.supply_voltage),
            ("coil_resistance", self.coil_resistance),
            ("force_constant", self.force_constant),
            ("sense_conversion", self.sense_conversion),
            ("sample_rate", self.sample_rate),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("coil_inductance", self.coil_inductance),
            ("quantization_step", self.quantization_step),
            ("displacement_noise_std", self.displacement_noise_std),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("force_limit", self.force_limit),
            ("travel_limit", self.travel_limit),
            ("filter_knee", self.filter_knee),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(invalid(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.oversample == 0 {
            return Err(invalid("oversample must be at least 1"));
        }
        Ok(())
    }
}

/// Unmeasured signals at the sample instants.
#[derive(Debug, Clone, PartialEq)]
pub struct RigTruth {
    pub current: Vec<f64>,
    pub force: Vec<f64>,
    /// Plant output after the travel stop, before noise and quantization.
    pub displacement: Vec<f64>,
    /// ADC voltage of the force channel.
    pub sense_voltage: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigOutput {
    pub dataset: Dataset,
    pub truth: RigTruth,
}

fn clamp_opt(v: f64, limit: Option<f64>) -> f64 {
    match limit {
        Some(l) => v.clamp(-l, l),
        None => v,
    }
}

/// Runs the rig under `command` (volts, one value per sample).
pub fn simulate_rig(config: &RigConfig, command: &TimeSeries) -> Result<RigOutput> {
    config.validate()?;
    if !same_dt(command.dt(), config.dt()) {
        return Err(invalid(format!(
            "command interval {} does not match the rig sample rate {} Hz",
            command.dt(),
            config.sample_rate
        )));
    }
    if let Some(v) = command
        .values()
        .iter()
        .find(|v| v.abs() > config.supply_voltage)
    {
        return Err(invalid(format!(
            "command {v} V exceeds the {} V supply",
            config.supply_voltage
        )));
    }

    let n = command.len();
    let h = config.dt() / config.oversample as f64;
    let ss = config.plant.state_space();
    let sub = ss.discretize_zoh(h);
    let (r, l, kf) = (
        config.coil_resistance,
        config.coil_inductance,
        config.force_constant,
    );
    let emf = if config.back_emf { kf } else { 0.0 };
    let mut filter = config
        .filter_knee
        .map(|knee| Rc2Filter::new(knee, 1.0 / h))
        .transpose()?;

    // Instantaneous current with L = 0: i = (v - Kf C (A x + B Kf i)) / R.
    let c_b = ss.c[0] * ss.b[0] + ss.c[1] * ss.b[1];
    let algebraic = |v: f64, x: &[f64; 2]| {
        let rate = ss.output_rate(x, 0.0);
        (v - emf * rate) / (r + emf * kf * c_b)
    };
    let di = |i: f64, v: f64, rate: f64| (v - r * i - emf * rate) / l;

    let mut x = [0.0f64; 2];
    let mut i = 0.0f64;
    let mut truth = RigTruth {
        current: Vec::with_capacity(n),
        force: Vec::with_capacity(n),
        displacement: Vec::with_capacity(n),
        sense_voltage: Vec::with_capacity(n),
    };

    for &v in command.values() {
        if l == 0.0 {
            i = algebraic(v, &x);
        }
        let force = clamp_opt(kf * i, config.force_limit);
        truth.current.push(i);
        truth.force.push(force);
        truth
            .displacement
            .push(clamp_opt(sub.output(&x, force), config.travel_limit));

        for j in 0..config.oversample {
            if l == 0.0 && j > 0 {
                i = algebraic(v, &x);
            }
            let f_start = clamp_opt(kf * i, config.force_limit);
            let sensed = match filter.as_mut() {
                Some(f) => f.process(f_start),
                None => f_start,
            };
            if j == 0 {
                truth
                    .sense_voltage
                    .push(sensed / kf * config.sense_conversion);
            }
            let f_sub = if l > 0.0 {
                let rate = ss.output_rate(&x, f_start);
                let k1 = di(i, v, rate);
                let k2 = di(i + 0.5 * h * k1, v, rate);
                let k3 = di(i + 0.5 * h * k2, v, rate);
                let k4 = di(i + h * k3, v, rate);
                let i_end = i + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                let f = clamp_opt(kf * 0.5 * (i + i_end), config.force_limit);
                i = i_end;
                f
            } else {
                f_start
            };
            sub.step(&mut x, f_sub);
        }
    }

    let dt = config.dt();
    let force: Vec<f64> = truth
        .sense_voltage
        .iter()
        .map(|s| s / config.sense_conversion * kf)
        .collect();

    let mut measured = truth.displacement.clone();
    if config.displacement_noise_std > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, config.displacement_noise_std)
            .map_err(|e| invalid(format!("noise distribution: {e}")))?;
        for m in &mut measured {
            *m += normal.sample(&mut rng);
        }
    }
    let measured = quantize_slice(&measured, config.quantization_step);

    Ok(RigOutput {
        dataset: Dataset::new(dt, force, measured)?,
        truth,
    })
}

/// Bilinear-transform first-order low-pass, prewarped at its corner.
#[derive(Debug, Clone, Copy)]
struct OnePole {
    alpha: f64,
    x1: f64,
    y1: f64,
}

impl OnePole {
    fn new(knee: f64, sample_rate: f64) -> Self {
        let wc = 2.0 * std::f64::consts::PI * knee;
        Self {
            alpha: 1.0 / (wc / (2.0 * sample_rate)).tan(),
            x1: 0.0,
            y1: 0.0,
        }
    }

    #[inline]
    fn process(&mut self, x: f64) -> f64 {
        let y = (x + self.x1 - (1.0 - self.alpha) * self.y1) / (1.0 + self.alpha);
        self.x1 = x;
        self.y1 = y;
        y
    }
}

/// Two identical first-order stages, starting from rest.
#[derive(Debug, Clone, Copy)]
struct Rc2Filter {
    stages: [OnePole; 2],
}

impl Rc2Filter {
    fn new(knee: f64, sample_rate: f64) -> Result<Self> {
        if !(knee > 0.0 && knee.is_finite()) {
            return Err(invalid(format!("filter knee must be positive, got {knee}")));
        }
        if knee >= 0.5 * sample_rate {
            return Err(invalid(format!(
                "filter knee {knee} Hz must lie below the Nyquist frequency {} Hz",
                0.5 * sample_rate
            )));
        }
        let stage = OnePole::new(knee, sample_rate);
        Ok(Self {
            stages: [stage, stage],
        })
    }

    #[inline]
    fn process(&mut self, x: f64) -> f64 {
        let y = self.stages[0].process(x);
        self.stages[1].process(y)
    }
}

/// Double-pole RC low-pass with corner `knee` Hz per stage and unity DC
/// gain, discretized by the bilinear transform prewarped at the corner.
pub fn rc_filter2(x: &TimeSeries, knee: f64) -> Result<TimeSeries> {
    let mut f = Rc2Filter::new(knee, 1.0 / x.dt())?;
    let y = x.values().iter().map(|&v| f.process(v)).collect();
    TimeSeries::new(x.dt(), y)
}

fn quantize_slice(x: &[f64], step: f64) -> Vec<f64> {
    if step > 0.0 {
        x.iter().map(|v| (v / step).round() * step).collect()
    } else {
        x.to_vec()
    }
}

/// Rounds each sample to the nearest multiple of `step` (ties away from
/// zero); a zero step passes the signal through.
pub fn quantize(x: &TimeSeries, step: f64) -> TimeSeries {
    TimeSeries::from_parts_unchecked(x.dt(), quantize_slice(x.values(), step))
}
