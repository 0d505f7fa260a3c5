//! Second-order parametric models of the force-to-displacement path.
//!
//! All three families share the denominator `s^2 + 2 zeta omega s + omega^2`
//! and have DC gain `G`:
//!
//! * no zero:   `G omega^2 / den`
//! * one zero:  `G omega^2 (s + z) / (z den)`
//! * zero pair: `G omega^2 (s^2 + 2 xi zc s + zc^2) / (zc^2 den)`
//!
//! The zero-pair model is biproper; its direct feedthrough
//! `D = G omega^2 / zc^2` is carried explicitly rather than as a sampled
//! Dirac term.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signals::TimeSeries;

/// Closed-form evaluators refuse damping ratios this close to critical.
pub const CRITICAL_DAMPING_GUARD: f64 = 1e-6;

/// Standard gravity used for spine conversion, m/s^2.
pub const GRAVITY: f64 = 9.81;

/// Mass hung from the shaft centre in the static spine test, kg.
pub const SPINE_TEST_MASS: f64 = 0.880;

pub const METERS_PER_INCH: f64 = 0.0254;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    NoZero,
    OneZero,
    ZeroPair,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::NoZero, ModelKind::OneZero, ModelKind::ZeroPair];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::NoZero => "no-zero",
            ModelKind::OneZero => "one-zero",
            ModelKind::ZeroPair => "zero-pair",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-zero" => Ok(ModelKind::NoZero),
            "one-zero" => Ok(ModelKind::OneZero),
            "zero-pair" => Ok(ModelKind::ZeroPair),
            other => Err(invalid(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Numerator structure of a [`SecondOrderModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Zeros {
    None,
    /// Real zero at `s = -z`.
    Real {
        z: f64,
    },
    /// Complex pair `-xi zc +/- i zc sqrt(1 - xi^2)`.
    Pair {
        freq: f64,
        damping: f64,
    },
}

/// Individually addressable model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameter {
    Gain,
    Damping,
    Frequency,
    Zero,
    ZeroFrequency,
    ZeroDamping,
}

impl Parameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::Gain => "gain",
            Parameter::Damping => "damping",
            Parameter::Frequency => "frequency",
            Parameter::Zero => "zero",
            Parameter::ZeroFrequency => "zero-frequency",
            Parameter::ZeroDamping => "zero-damping",
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Parameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gain" => Ok(Parameter::Gain),
            "damping" => Ok(Parameter::Damping),
            "frequency" => Ok(Parameter::Frequency),
            "zero" => Ok(Parameter::Zero),
            "zero-frequency" => Ok(Parameter::ZeroFrequency),
            "zero-damping" => Ok(Parameter::ZeroDamping),
            other => Err(invalid(format!("unknown parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderModel {
    /// DC gain, m/N.
    pub gain: f64,
    pub zeta: f64,
    /// Natural frequency, rad/s.
    pub omega: f64,
    pub zeros: Zeros,
}

impl SecondOrderModel {
    pub fn no_zero(gain: f64, zeta: f64, omega: f64) -> Result<Self> {
        Self {
            gain,
            zeta,
            omega,
            zeros: Zeros::None,
        }
        .validated()
    }

    pub fn one_zero(gain: f64, zeta: f64, omega: f64, z: f64) -> Result<Self> {
        Self {
            gain,
            zeta,
            omega,
            zeros: Zeros::Real { z },
        }
        .validated()
    }

    pub fn zero_pair(gain: f64, zeta: f64, omega: f64, freq: f64, damping: f64) -> Result<Self> {
        Self {
            gain,
            zeta,
            omega,
            zeros: Zeros::Pair { freq, damping },
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(invalid(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(invalid(format!("zeta must be positive, got {}", self.zeta)));
        }
        if !(self.gain.is_finite() && self.gain != 0.0) {
            return Err(invalid(format!(
                "gain must be finite and nonzero, got {}",
                self.gain
            )));
        }
        match self.zeros {
            Zeros::None => {}
            Zeros::Real { z } => {
                if !(z.is_finite() && z != 0.0) {
                    return Err(invalid(format!("zero location must be nonzero, got {z}")));
                }
            }
            Zeros::Pair { freq, damping } => {
                if !(freq > 0.0 && freq.is_finite()) {
                    return Err(invalid(format!(
                        "zero frequency must be positive, got {freq}"
                    )));
                }
                if !(0.0..1.0).contains(&damping) {
                    return Err(invalid(format!(
                        "zero damping must lie in [0, 1), got {damping}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ModelKind {
        match self.zeros {
            Zeros::None => ModelKind::NoZero,
            Zeros::Real { .. } => ModelKind::OneZero,
            Zeros::Pair { .. } => ModelKind::ZeroPair,
        }
    }

    pub fn parameter(&self, p: Parameter) -> Option<f64> {
        match (p, self.zeros) {
            (Parameter::Gain, _) => Some(self.gain),
            (Parameter::Damping, _) => Some(self.zeta),
            (Parameter::Frequency, _) => Some(self.omega),
            (Parameter::Zero, Zeros::Real { z }) => Some(z),
            (Parameter::ZeroFrequency, Zeros::Pair { freq, .. }) => Some(freq),
            (Parameter::ZeroDamping, Zeros::Pair { damping, .. }) => Some(damping),
            _ => None,
        }
    }

    /// Copy with one parameter replaced; `None` when the kind lacks it.
    pub fn with_parameter(&self, p: Parameter, value: f64) -> Option<Self> {
        let mut m = *self;
        match (p, &mut m.zeros) {
            (Parameter::Gain, _) => m.gain = value,
            (Parameter::Damping, _) => m.zeta = value,
            (Parameter::Frequency, _) => m.omega = value,
            (Parameter::Zero, Zeros::Real { z }) => *z = value,
            (Parameter::ZeroFrequency, Zeros::Pair { freq, .. }) => *freq = value,
            (Parameter::ZeroDamping, Zeros::Pair { damping, .. }) => *damping = value,
            _ => return None,
        }
        Some(m)
    }

    pub fn parameters(&self) -> &'static [Parameter] {
        match self.kind() {
            ModelKind::NoZero => &[Parameter::Gain, Parameter::Damping, Parameter::Frequency],
            ModelKind::OneZero => &[
                Parameter::Gain,
                Parameter::Damping,
                Parameter::Frequency,
                Parameter::Zero,
            ],
            ModelKind::ZeroPair => &[
                Parameter::Gain,
                Parameter::Damping,
                Parameter::Frequency,
                Parameter::ZeroFrequency,
                Parameter::ZeroDamping,
            ],
        }
    }

    pub fn natural_frequency_hz(&self) -> f64 {
        self.omega / (2.0 * std::f64::consts::PI)
    }

    /// Strictly proper part `(a s + b) / den` and feedthrough `D`.
    fn partial_fraction(&self) -> (f64, f64, f64) {
        let k = self.gain * self.omega * self.omega;
        match self.zeros {
            Zeros::None => (0.0, k, 0.0),
            Zeros::Real { z } => (k / z, k, 0.0),
            Zeros::Pair { freq, damping } => {
                let d = k / (freq * freq);
                let a = d * (2.0 * damping * freq - 2.0 * self.zeta * self.omega);
                let b = d * (freq * freq - self.omega * self.omega);
                (a, b, d)
            }
        }
    }

    pub fn direct_feedthrough(&self) -> f64 {
        self.partial_fraction().2
    }

    /// Evaluates `H(s)`.
    pub fn response_at(&self, s: Complex64) -> Complex64 {
        let w2 = self.omega * self.omega;
        let den = s * s + 2.0 * self.zeta * self.omega * s + w2;
        let num = match self.zeros {
            Zeros::None => Complex64::new(self.gain * w2, 0.0),
            Zeros::Real { z } => self.gain * w2 * (s + z) / z,
            Zeros::Pair { freq, damping } => {
                self.gain * w2 * (s * s + 2.0 * damping * freq * s + freq * freq) / (freq * freq)
            }
        };
        num / den
    }

    /// Controllable-canonical realization
    /// `x' = A x + B u`, `y = C x + D u`.
    pub fn state_space(&self) -> StateSpace {
        let (a, b, d) = self.partial_fraction();
        StateSpace {
            a: [
                [0.0, 1.0],
                [-self.omega * self.omega, -2.0 * self.zeta * self.omega],
            ],
            b: [0.0, 1.0],
            c: [b, a],
            d,
        }
    }
}

/// Largest entry of `[[A, B], [0, 0]] dt` that [`StateSpace::discretize_zoh`]
/// accepts.
pub const MAX_EXP_NORM: f64 = 1e30;

/// Continuous-time 2-state realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpace {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: f64,
}

impl StateSpace {
    /// Exact zero-order-hold discretization via the matrix exponential of
    /// the augmented `[[A, B], [0, 0]]` block.
    ///
    /// Blocks with a non-finite entry or an entry above [`MAX_EXP_NORM`]
    /// give an all-NaN result; the exponential does not terminate reliably
    /// there.
    pub fn discretize_zoh(&self, dt: f64) -> DiscreteStateSpace {
        let m = Matrix3::new(
            self.a[0][0] * dt,
            self.a[0][1] * dt,
            self.b[0] * dt,
            self.a[1][0] * dt,
            self.a[1][1] * dt,
            self.b[1] * dt,
            0.0,
            0.0,
            0.0,
        );
        if !(m.amax() <= MAX_EXP_NORM) {
            return DiscreteStateSpace {
                a: [[f64::NAN; 2]; 2],
                b: [f64::NAN; 2],
                c: self.c,
                d: self.d,
            };
        }
        let e = m.exp();
        DiscreteStateSpace {
            a: [[e[(0, 0)], e[(0, 1)]], [e[(1, 0)], e[(1, 1)]]],
            b: [e[(0, 2)], e[(1, 2)]],
            c: self.c,
            d: self.d,
        }
    }

    /// Output derivative of the strictly proper part, `C (A x + B u)`.
    pub fn output_rate(&self, x: &[f64; 2], u: f64) -> f64 {
        let dx0 = self.a[0][0] * x[0] + self.a[0][1] * x[1] + self.b[0] * u;
        let dx1 = self.a[1][0] * x[0] + self.a[1][1] * x[1] + self.b[1] * u;
        self.c[0] * dx0 + self.c[1] * dx1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteStateSpace {
    pub a: [[f64; 2]; 2],
    pub b: [f64; 2],
    pub c: [f64; 2],
    pub d: f64,
}

impl DiscreteStateSpace {
    /// Output at the current sample, then advance the state one hold interval.
    #[inline]
    pub fn step(&self, x: &mut [f64; 2], u: f64) -> f64 {
        let y = self.output(x, u);
        let x0 = self.a[0][0] * x[0] + self.a[0][1] * x[1] + self.b[0] * u;
        let x1 = self.a[1][0] * x[0] + self.a[1][1] * x[1] + self.b[1] * u;
        *x = [x0, x1];
        y
    }

    #[inline]
    pub fn output(&self, x: &[f64; 2], u: f64) -> f64 {
        self.c[0] * x[0] + self.c[1] * x[1] + self.d * u
    }

    pub fn simulate(&self, u: &[f64]) -> Vec<f64> {
        let mut x = [0.0; 2];
        u.iter().map(|&v| self.step(&mut x, v)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunctionShape {
    pub poles: [Complex64; 2],
    pub zeros: Vec<Complex64>,
    pub direct_feedthrough: f64,
}

pub fn transfer_function(model: &SecondOrderModel) -> Result<TransferFunctionShape> {
    model.validate()?;
    let sigma = model.zeta * model.omega;
    let poles = if model.zeta < 1.0 {
        let wd = model.omega * (1.0 - model.zeta * model.zeta).sqrt();
        [Complex64::new(-sigma, wd), Complex64::new(-sigma, -wd)]
    } else {
        let wo = model.omega * (model.zeta * model.zeta - 1.0).sqrt();
        [
            Complex64::new(-sigma + wo, 0.0),
            Complex64::new(-sigma - wo, 0.0),
        ]
    };
    let zeros = match model.zeros {
        Zeros::None => Vec::new(),
        Zeros::Real { z } => vec![Complex64::new(-z, 0.0)],
        Zeros::Pair { freq, damping } => {
            let im = freq * (1.0 - damping * damping).sqrt();
            vec![
                Complex64::new(-damping * freq, im),
                Complex64::new(-damping * freq, -im),
            ]
        }
    };
    Ok(TransferFunctionShape {
        poles,
        zeros,
        direct_feedthrough: model.direct_feedthrough(),
    })
}

/// Impulse response at time `t`, m/(N s). For the zero-pair model only the
/// smooth part is returned; the impulsive part has weight
/// [`SecondOrderModel::direct_feedthrough`].
pub fn impulse_response(model: &SecondOrderModel, t: f64) -> Result<f64> {
    model.validate()?;
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be non-negative, got {t}")));
    }
    if (model.zeta - 1.0).abs() <= CRITICAL_DAMPING_GUARD {
        return Err(Error::UnsupportedParameter(format!(
            "zeta = {} is too close to critical damping for the closed form; use simulate_zoh",
            model.zeta
        )));
    }
    Ok(impulse_response_unchecked(model, t))
}

fn impulse_response_unchecked(model: &SecondOrderModel, t: f64) -> f64 {
    let (a, b, _) = model.partial_fraction();
    let sigma = model.zeta * model.omega;
    let c = b - a * sigma;
    if model.zeta < 1.0 {
        let wd = model.omega * (1.0 - model.zeta * model.zeta).sqrt();
        let (s, co) = (wd * t).sin_cos();
        (-sigma * t).exp() * (a * co + c / wd * s)
    } else {
        let wo = model.omega * (model.zeta * model.zeta - 1.0).sqrt();
        let slow = ((-sigma + wo) * t).exp();
        let fast = ((-sigma - wo) * t).exp();
        a * 0.5 * (slow + fast) + c / wo * 0.5 * (slow - fast)
    }
}

/// `impulse_response` at `k dt` for `k in 0..n`.
pub fn sampled_impulse_response(model: &SecondOrderModel, dt: f64, n: usize) -> Result<Vec<f64>> {
    impulse_response(model, 0.0)?;
    if !(dt > 0.0) {
        return Err(invalid("sample interval must be positive"));
    }
    Ok((0..n)
        .map(|k| impulse_response_unchecked(model, k as f64 * dt))
        .collect())
}

/// Displacement response to a force record under a zero-order hold,
/// starting from rest.
pub fn simulate_zoh(model: &SecondOrderModel, force: &TimeSeries) -> Result<TimeSeries> {
    model.validate()?;
    let disc = model.state_space().discretize_zoh(force.dt());
    Ok(TimeSeries::from_parts_unchecked(
        force.dt(),
        disc.simulate(force.values()),
    ))
}

/// Magnitude and phase (radians, unwrapped along the list) of `H(i w)`.
pub fn bode(model: &SecondOrderModel, frequencies: &[f64]) -> Result<Vec<(f64, f64)>> {
    model.validate()?;
    if let Some(w) = frequencies.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
        return Err(invalid(format!("frequencies must be positive, got {w}")));
    }
    let mut prev: Option<f64> = None;
    Ok(frequencies
        .iter()
        .map(|&w| {
            let h = model.response_at(Complex64::new(0.0, w));
            let mut phase = h.arg();
            if let Some(p) = prev {
                let two_pi = 2.0 * std::f64::consts::PI;
                phase -= two_pi * ((phase - p) / two_pi).round();
            }
            prev = Some(phase);
            (h.norm(), phase)
        })
        .collect())
}

/// Static centre deflection under the standard spine-test weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpineRating {
    pub deflection: f64,
}

impl SpineRating {
    pub fn new(deflection: f64) -> Result<Self> {
        if !(deflection > 0.0 && deflection.is_finite()) {
            return Err(invalid(format!(
                "deflection must be positive, got {deflection}"
            )));
        }
        Ok(Self { deflection })
    }

    /// Spine numbers are thousandths of an inch, e.g. 300 -> 0.300 in.
    pub fn from_spine_number(spine: f64) -> Result<Self> {
        Self::new(spine * 1e-3 * METERS_PER_INCH)
    }
}

/// `K = m g / deflection`, N/m.
pub fn stiffness_from_static_spine(spine: SpineRating) -> Result<f64> {
    if !(spine.deflection > 0.0 && spine.deflection.is_finite()) {
        return Err(invalid(format!(
            "deflection must be positive, got {}",
            spine.deflection
        )));
    }
    Ok(SPINE_TEST_MASS * GRAVITY / spine.deflection)
}

/// Undamped natural frequency of a lumped spring-mass, Hz.
pub fn expected_frequency(stiffness: f64, lumped_mass: f64) -> Result<f64> {
    if !(stiffness > 0.0 && lumped_mass > 0.0) {
        return Err(invalid(format!(
            "stiffness and mass must be positive, got {stiffness} and {lumped_mass}"
        )));
    }
    Ok((stiffness / lumped_mass).sqrt() / (2.0 * std::f64::consts::PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn arr300() -> SecondOrderModel {
        SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16).unwrap()
    }

    #[test]
    fn poles_from_table_row() {
        let m = SecondOrderModel::no_zero(2.64e-4, 0.289, 243.01).unwrap();
        let tf = transfer_function(&m).unwrap();
        assert_relative_eq!(tf.poles[0].re, -70.23, epsilon = 0.01);
        assert_relative_eq!(tf.poles[0].im, 232.64, epsilon = 0.01);
        assert_eq!(tf.poles[1], tf.poles[0].conj());
        assert!(tf.zeros.is_empty());
        assert_eq!(tf.direct_feedthrough, 0.0);
    }

    #[test]
    fn absurdly_stiff_block_is_nan() {
        let m = SecondOrderModel::no_zero(1.6e-5, 5.5e33, 1.3e9).unwrap();
        let d = m.state_space().discretize_zoh(2.5e-4);
        assert!(d.a.iter().flatten().chain(&d.b).all(|v| v.is_nan()));
        let ok = arr300().state_space().discretize_zoh(2.5e-4);
        assert!(ok.a.iter().flatten().chain(&ok.b).all(|v| v.is_finite()));
    }

    #[test]
    fn one_zero_location() {
        let m = SecondOrderModel::one_zero(2.64e-4, 0.289, 243.01, 4163.0).unwrap();
        let tf = transfer_function(&m).unwrap();
        assert_eq!(tf.zeros, vec![Complex64::new(-4163.0, 0.0)]);
    }

    #[test]
    fn undamped_limit_poles() {
        let m = SecondOrderModel::no_zero(1.0, 1e-12, 100.0).unwrap();
        let tf = transfer_function(&m).unwrap();
        assert!(tf.poles[0].re.abs() < 1e-9);
        assert_relative_eq!(tf.poles[0].im, 100.0, max_relative = 1e-12);
    }

    #[test]
    fn overdamped_poles_are_real() {
        let m = SecondOrderModel::no_zero(1.0, 2.0, 10.0).unwrap();
        let tf = transfer_function(&m).unwrap();
        assert!(tf.poles.iter().all(|p| p.im == 0.0 && p.re < 0.0));
    }

    #[test]
    fn invariants_rejected() {
        assert!(SecondOrderModel::no_zero(1.0, 0.3, 0.0).is_err());
        assert!(SecondOrderModel::no_zero(1.0, 0.0, 10.0).is_err());
        assert!(SecondOrderModel::no_zero(0.0, 0.3, 10.0).is_err());
        assert!(SecondOrderModel::one_zero(1.0, 0.3, 10.0, 0.0).is_err());
        assert!(SecondOrderModel::zero_pair(1.0, 0.3, 10.0, 0.0, 0.1).is_err());
        assert!(SecondOrderModel::zero_pair(1.0, 0.3, 10.0, 5.0, 1.0).is_err());
        assert!(SecondOrderModel::zero_pair(1.0, 0.3, 10.0, 5.0, -0.1).is_err());
    }

    #[test]
    fn impulse_starts_at_zero_and_guards() {
        assert_eq!(impulse_response(&arr300(), 0.0).unwrap(), 0.0);
        assert!(matches!(
            impulse_response(&arr300(), -1e-3),
            Err(Error::InvalidArgument(_))
        ));
        let crit = SecondOrderModel::no_zero(1.0, 1.0 + 1e-7, 10.0).unwrap();
        assert!(matches!(
            impulse_response(&crit, 0.1),
            Err(Error::UnsupportedParameter(_))
        ));
    }

    #[test]
    fn one_zero_impulse_initial_value() {
        // h(0+) = lim s H(s) = G omega^2 / z
        let m = SecondOrderModel::one_zero(2.0, 0.3, 50.0, 400.0).unwrap();
        assert_relative_eq!(
            impulse_response(&m, 0.0).unwrap(),
            2.0 * 2500.0 / 400.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn zero_pair_smooth_part_converges_to_no_zero() {
        let g = 1.3e-3;
        let (zeta, omega) = (0.3, 250.0);
        let a = SecondOrderModel::no_zero(g, zeta, omega).unwrap();
        let c = SecondOrderModel::zero_pair(g, zeta, omega, 1e6 * omega, 0.4).unwrap();
        let peak = (1..400)
            .map(|k| impulse_response(&a, k as f64 * 1e-4).unwrap().abs())
            .fold(0.0, f64::max);
        for k in 1..400 {
            let t = k as f64 * 1e-4;
            let ha = impulse_response(&a, t).unwrap();
            let hc = impulse_response(&c, t).unwrap();
            assert!((ha - hc).abs() <= 1e-4 * peak, "t={t}: {ha} vs {hc}");
        }
    }

    #[test]
    fn zoh_zero_input_and_dc() {
        let m = arr300();
        let dt = 2.5e-4;
        let z = TimeSeries::new(dt, vec![0.0; 100]).unwrap();
        assert!(simulate_zoh(&m, &z)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));

        let settle = 10.0 / (m.zeta * m.omega);
        let n = (settle / dt).ceil() as usize + 10;
        let f0 = 3.0;
        let y = simulate_zoh(&m, &TimeSeries::new(dt, vec![f0; n]).unwrap()).unwrap();
        assert_relative_eq!(
            *y.values().last().unwrap(),
            m.gain * f0,
            max_relative = 1e-3
        );
    }

    #[test]
    fn zoh_handles_critical_damping() {
        let m = SecondOrderModel::no_zero(1e-3, 1.0, 200.0).unwrap();
        let dt = 1e-3;
        let y = simulate_zoh(&m, &TimeSeries::new(dt, vec![1.0; 200]).unwrap()).unwrap();
        // critically damped step: G (1 - (1 + w t) e^{-w t})
        for (n, v) in y.values().iter().enumerate() {
            let t = n as f64 * dt;
            let exact = 1e-3 * (1.0 - (1.0 + 200.0 * t) * (-200.0 * t).exp());
            assert!((v - exact).abs() < 1e-12, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn zero_pair_feedthrough_reaches_output_immediately() {
        let m = SecondOrderModel::zero_pair(1e-3, 0.3, 200.0, 600.0, 0.1).unwrap();
        let y = simulate_zoh(&m, &TimeSeries::new(1e-4, vec![2.0, 0.0]).unwrap()).unwrap();
        assert_relative_eq!(
            y.values()[0],
            2.0 * m.direct_feedthrough(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn bode_dc_and_rolloff() {
        let m = arr300();
        let r = bode(&m, &[1e-6 * m.omega, 100.0 * m.omega]).unwrap();
        assert_relative_eq!(r[0].0, m.gain, max_relative = 1e-6);
        assert_relative_eq!(r[1].0, m.gain * 1e-4, max_relative = 1e-3);
        assert!(bode(&m, &[0.0]).is_err());
        assert!(bode(&m, &[-1.0]).is_err());
        assert_eq!(bode(&m, &[10.0]).unwrap().len(), 1);
    }

    #[test]
    fn spine_table_values() {
        let k = |d: f64| stiffness_from_static_spine(SpineRating::new(d).unwrap()).unwrap();
        assert_relative_eq!(k(0.00762), 1132.9, max_relative = 1e-4);
        assert_relative_eq!(k(0.0127), 679.7, max_relative = 1e-4);
        assert_relative_eq!(k(0.0086328), 1000.0, max_relative = 1e-12);
        assert!(SpineRating::new(0.0).is_err());
        assert!(stiffness_from_static_spine(SpineRating { deflection: -1.0 }).is_err());
        assert_relative_eq!(
            SpineRating::from_spine_number(300.0).unwrap().deflection,
            0.00762,
            max_relative = 1e-12
        );
    }

    #[test]
    fn expected_frequency_values() {
        use std::f64::consts::PI;
        assert_relative_eq!(
            expected_frequency(4.0 * PI * PI, 1.0).unwrap(),
            1.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            expected_frequency(1132.9, 0.01849).unwrap(),
            39.4,
            epsilon = 0.05
        );
        assert_relative_eq!(
            expected_frequency(679.7, 0.01321).unwrap(),
            36.1,
            epsilon = 0.05
        );
        assert!(expected_frequency(0.0, 1.0).is_err());
        assert!(expected_frequency(1.0, -1.0).is_err());
    }

    #[test]
    fn parameter_access() {
        let m = SecondOrderModel::one_zero(1.0, 0.3, 10.0, 40.0).unwrap();
        assert_eq!(m.parameter(Parameter::Zero), Some(40.0));
        assert_eq!(m.parameter(Parameter::ZeroFrequency), None);
        assert_eq!(m.with_parameter(Parameter::Damping, 0.5).unwrap().zeta, 0.5);
        assert!(arr300().with_parameter(Parameter::Zero, 1.0).is_none());
        assert_eq!(
            "zero-pair".parse::<ModelKind>().unwrap(),
            ModelKind::ZeroPair
        );
    }
}
