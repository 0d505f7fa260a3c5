//! Compares an arrow before and after fatigue loading. Each condition is
//! the mean over several noisy trials on the simulated rig.

use arrow_sysid::estimation::{
    aggregate_trials, compare_conditions, fit_parametric, ConditionRecord, FitOptions,
};
use arrow_sysid::models::{ModelKind, SecondOrderModel};
use arrow_sysid::rigsim::simulate_rig;
use arrow_sysid::signals::generate_prbs;
use arrow_sysid::RigConfig;

fn condition(plant: SecondOrderModel, trials: u64) -> arrow_sysid::Result<ConditionRecord> {
    let mut zeta = Vec::new();
    let mut omega = Vec::new();
    let mut gain = Vec::new();
    for trial in 0..trials {
        let mut cfg = RigConfig::new(plant);
        cfg.displacement_noise_std = 2e-5;
        cfg.seed = trial;
        let cmd = generate_prbs(40_000, 6.0, 8, 100 + trial, cfg.dt())?;
        let data = simulate_rig(&cfg, &cmd)?.dataset;
        let fit = fit_parametric(&data, ModelKind::NoZero, None, &FitOptions::default())?;
        gain.push(fit.model.gain);
        zeta.push(fit.model.zeta);
        omega.push(fit.model.omega);
    }
    let mean = |v: &[f64]| aggregate_trials(v).map(|a| a.mean);
    ConditionRecord::from_model(&SecondOrderModel::no_zero(
        mean(&gain)?,
        mean(&zeta)?,
        mean(&omega)?,
    )?)
}

fn main() -> arrow_sysid::Result<()> {
    // fatigue softens the shaft and adds internal friction
    let before = SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16)?;
    let after = SecondOrderModel::no_zero(2.64e-4 / 0.9, 0.31, 239.16 * 0.9f64.sqrt())?;

    let cmp = compare_conditions(&condition(before, 3)?, &condition(after, 3)?);
    println!(
        "{:<20} {:>11} {:>11} {:>8}",
        "field", "before", "after", "change"
    );
    for (name, d) in cmp.fields() {
        println!(
            "{name:<20} {:>11.4} {:>11.4} {:>+7.1}%",
            d.before,
            d.after,
            100.0 * d.relative
        );
    }
    Ok(())
}
