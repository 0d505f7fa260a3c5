//! Scans each fitted parameter around its optimum. A sharp peak means the
//! data pin the parameter down; a flat one means they do not.

use arrow_sysid::estimation::{fit_parametric, sensitivity_sweep, FitOptions};
use arrow_sysid::models::{simulate_zoh, ModelKind, SecondOrderModel};
use arrow_sysid::signals::generate_prbs;
use arrow_sysid::Dataset;

fn main() -> arrow_sysid::Result<()> {
    let plant = SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16)?;
    let dt = 1.0 / 4000.0;
    let force = generate_prbs(40_000, 5.0, 4, 2, dt)?;
    let disp = simulate_zoh(&plant, &force)?;
    let data = Dataset::new(dt, force.into_values(), disp.into_values())?;
    let fit = fit_parametric(&data, ModelKind::NoZero, None, &FitOptions::default())?;

    for &p in fit.model.parameters() {
        let curve = sensitivity_sweep(&data, &fit, p, 0.2, 11)?;
        let row: Vec<String> = curve.vaf.iter().map(|v| format!("{v:6.1}")).collect();
        println!("{:<10} {}", p.as_str(), row.join(" "));
    }
    Ok(())
}
