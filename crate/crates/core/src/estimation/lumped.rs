use serde::{Deserialize, Serialize};

use super::{LumpedParams, TrialAggregate};
use crate::error::{invalid, Result};
use crate::models::{ModelKind, SecondOrderModel};

/// Single-mode mass/damping/stiffness of a no-zero model with gain in m/N:
/// `K = 1/G`, `M = K / omega^2`, `B = 2 zeta omega M`.
pub fn extract_lumped(model: &SecondOrderModel) -> Result<LumpedParams> {
    model.validate()?;
    if model.kind() != ModelKind::NoZero {
        return Err(invalid(format!(
            "lumped parameters need a no-zero model, got {}",
            model.kind()
        )));
    }
    if !(model.gain > 0.0) {
        return Err(invalid(format!(
            "gain must be positive for a passive spring, got {}",
            model.gain
        )));
    }
    let stiffness = 1.0 / model.gain;
    let mass = stiffness / (model.omega * model.omega);
    let damping = 2.0 * model.zeta * model.omega * mass;
    Ok(LumpedParams {
        mass,
        damping,
        stiffness,
    })
}

pub fn aggregate_trials(values: &[f64]) -> Result<TrialAggregate> {
    if values.is_empty() {
        return Err(invalid("no trials to aggregate"));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    Ok(TrialAggregate {
        mean,
        half_range: (hi - lo) / 2.0,
    })
}

/// One arrow's identified state, e.g. before or after fatigue cycling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionRecord {
    pub freq_hz: f64,
    pub zeta: f64,
    pub lumped: LumpedParams,
}

impl ConditionRecord {
    pub fn from_model(model: &SecondOrderModel) -> Result<Self> {
        Ok(Self {
            freq_hz: model.natural_frequency_hz(),
            zeta: model.zeta,
            lumped: extract_lumped(model)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDelta {
    pub before: f64,
    pub after: f64,
    pub delta: f64,
    /// `delta / before`; NaN when `before` is zero.
    pub relative: f64,
}

impl FieldDelta {
    fn new(before: f64, after: f64) -> Self {
        let delta = after - before;
        Self {
            before,
            after,
            delta,
            relative: if before != 0.0 {
                delta / before
            } else {
                f64::NAN
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionComparison {
    pub freq_hz: FieldDelta,
    pub zeta: FieldDelta,
    pub mass_kg: FieldDelta,
    pub damping_ns_per_m: FieldDelta,
    pub stiffness_n_per_m: FieldDelta,
}

impl ConditionComparison {
    pub fn fields(&self) -> [(&'static str, FieldDelta); 5] {
        [
            ("freq_hz", self.freq_hz),
            ("zeta", self.zeta),
            ("mass_kg", self.mass_kg),
            ("damping_Ns_per_m", self.damping_ns_per_m),
            ("stiffness_N_per_m", self.stiffness_n_per_m),
        ]
    }
}

pub fn compare_conditions(
    before: &ConditionRecord,
    after: &ConditionRecord,
) -> ConditionComparison {
    ConditionComparison {
        freq_hz: FieldDelta::new(before.freq_hz, after.freq_hz),
        zeta: FieldDelta::new(before.zeta, after.zeta),
        mass_kg: FieldDelta::new(before.lumped.mass, after.lumped.mass),
        damping_ns_per_m: FieldDelta::new(before.lumped.damping, after.lumped.damping),
        stiffness_n_per_m: FieldDelta::new(before.lumped.stiffness, after.lumped.stiffness),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn direct_algebra() {
        let m = SecondOrderModel::no_zero(1e-3, 0.5, 100.0).unwrap();
        let l = extract_lumped(&m).unwrap();
        assert_relative_eq!(l.stiffness, 1000.0, max_relative = 1e-12);
        assert_relative_eq!(l.mass, 0.1, max_relative = 1e-12);
        assert_relative_eq!(l.damping, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn aluminium_2219_row() {
        let omega = 2.0 * PI * 40.8;
        let m = SecondOrderModel::no_zero(1.0 / 1484.7, 0.67, omega).unwrap();
        let l = extract_lumped(&m).unwrap();
        assert_relative_eq!(l.mass * 1e3, 22.6, epsilon = 0.05);
        assert_relative_eq!(l.damping, 7.76, epsilon = 0.01);
    }

    #[test]
    fn carbon_300_row() {
        let omega = 2.0 * PI * 40.3;
        let m = SecondOrderModel::no_zero(1.0 / 853.6, 0.32, omega).unwrap();
        let l = extract_lumped(&m).unwrap();
        assert_relative_eq!(l.mass * 1e3, 13.3, max_relative = 0.02);
        assert_relative_eq!(l.damping, 2.15, max_relative = 0.02);
    }

    #[test]
    fn lumped_recomposition() {
        let m = SecondOrderModel::no_zero(3.7e-3, 0.42, 287.5).unwrap();
        let l = extract_lumped(&m).unwrap();
        assert_relative_eq!(l.natural_frequency(), m.omega, max_relative = 1e-12);
        assert_relative_eq!(l.damping_ratio(), m.zeta, max_relative = 1e-12);
    }

    #[test]
    fn lumped_rejections() {
        let neg = SecondOrderModel::no_zero(-1e-3, 0.5, 100.0).unwrap();
        assert!(extract_lumped(&neg).is_err());
        let zero = SecondOrderModel::one_zero(1e-3, 0.5, 100.0, 400.0).unwrap();
        assert!(extract_lumped(&zero).is_err());
    }

    #[test]
    fn aggregates() {
        let a = aggregate_trials(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((a.mean, a.half_range), (5.0, 0.0));
        let a = aggregate_trials(&[39.2, 41.4]).unwrap();
        assert_relative_eq!(a.mean, 40.3, max_relative = 1e-12);
        assert_relative_eq!(a.half_range, 1.1, max_relative = 1e-12);
        assert_eq!(format!("{a:.1}"), "40.3 ± 1.1");
        let a = aggregate_trials(&[7.0]).unwrap();
        assert_eq!((a.mean, a.half_range), (7.0, 0.0));
        assert!(aggregate_trials(&[]).is_err());
    }

    fn record(freq_hz: f64, zeta: f64, mass: f64, damping: f64, stiffness: f64) -> ConditionRecord {
        ConditionRecord {
            freq_hz,
            zeta,
            lumped: LumpedParams {
                mass,
                damping,
                stiffness,
            },
        }
    }

    #[test]
    fn comparisons() {
        let r = record(40.0, 0.5, 0.01, 2.0, 700.0);
        assert!(compare_conditions(&r, &r)
            .fields()
            .iter()
            .all(|(_, d)| d.delta == 0.0));

        let before = record(34.5, 0.39, 10.3e-3, 1.7, 486.2);
        let after = record(45.5, 0.42, 9.024274e-3, 2.15, 737.2);
        let c = compare_conditions(&before, &after);
        assert_relative_eq!(c.stiffness_n_per_m.delta, 251.0, max_relative = 1e-12);

        let before = record(40.8, 0.67, 22.7e-3, 7.8, 1484.7);
        let after = record(43.8, 0.35, 22.55158e-3, 4.35, 1705.4);
        let c = compare_conditions(&before, &after);
        assert_relative_eq!(c.zeta.delta, -0.32, max_relative = 1e-12);
    }
}
