use super::{FitResult, SensitivityCurve, SensitivityParameter};
use crate::error::{invalid, Result};
use crate::signals::{self, Dataset};

/// VAF as one fitted parameter is scanned over `value * (1 +/- range)` with
/// the others held.
pub fn sensitivity_sweep(
    data: &Dataset,
    fitted: &FitResult,
    parameter: SensitivityParameter,
    relative_range: f64,
    n_points: usize,
) -> Result<SensitivityCurve> {
    if n_points < 2 {
        return Err(invalid(format!(
            "need at least 2 grid points, got {n_points}"
        )));
    }
    if !(relative_range > 0.0 && relative_range < 1.0) {
        return Err(invalid(format!(
            "relative range must lie in (0, 1), got {relative_range}"
        )));
    }
    let model = fitted.model;
    let center = model.parameter(parameter).ok_or_else(|| {
        invalid(format!(
            "parameter {parameter} is not part of a {} model",
            model.kind()
        ))
    })?;

    let span = (n_points - 1) as f64;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| center * (1.0 + relative_range * (2.0 * i as f64 / span - 1.0)))
        .collect();
    let vaf = grid
        .iter()
        .map(|&v| {
            let m = model
                .with_parameter(parameter, v)
                .expect("parameter exists on this kind");
            m.validate()?;
            let predicted = m
                .state_space()
                .discretize_zoh(data.dt())
                .simulate(data.force());
            signals::vaf_slices(data.displacement(), &predicted)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SensitivityCurve {
        parameter,
        grid,
        vaf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{fit_parametric, FitOptions};
    use crate::models::{simulate_zoh, ModelKind, SecondOrderModel};
    use crate::signals::generate_prbs;

    fn fitted() -> (Dataset, FitResult) {
        let truth = SecondOrderModel::no_zero(1.2e-3, 0.3, 250.0).unwrap();
        let dt = 2.5e-4;
        let u = generate_prbs(12_000, 1.0, 2, 4, dt).unwrap();
        let y = simulate_zoh(&truth, &u).unwrap();
        let data = Dataset::new(dt, u.into_values(), y.into_values()).unwrap();
        let fit = fit_parametric(
            &data,
            ModelKind::NoZero,
            Some(&truth),
            &FitOptions::default(),
        )
        .unwrap();
        (data, fit)
    }

    #[test]
    fn center_matches_fit_and_peaks() {
        let (data, fit) = fitted();
        for p in [
            SensitivityParameter::Gain,
            SensitivityParameter::Damping,
            SensitivityParameter::Frequency,
        ] {
            let c = sensitivity_sweep(&data, &fit, p, 0.2, 21).unwrap();
            assert_eq!(c.grid[10], fit.model.parameter(p).unwrap());
            assert!((c.vaf[10] - fit.vaf_percent).abs() < 1e-9);
            assert_eq!(c.peak_index(), 10);
            assert!(c.grid.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn bad_arguments() {
        let (data, fit) = fitted();
        assert!(sensitivity_sweep(&data, &fit, SensitivityParameter::Gain, 0.2, 1).is_err());
        assert!(sensitivity_sweep(&data, &fit, SensitivityParameter::Gain, 1.0, 5).is_err());
        assert!(sensitivity_sweep(&data, &fit, SensitivityParameter::Zero, 0.2, 5).is_err());
    }
}
