//! Fits all three model families to data from a one-zero plant. Both zero
//! families start from the no-zero fit, so neither falls below it; the zero
//! pair cannot place a single real zero and trails the one-zero fit.

use arrow_sysid::estimation::{fit_nested, fit_parametric, FitOptions};
use arrow_sysid::models::{simulate_zoh, ModelKind, SecondOrderModel};
use arrow_sysid::signals::generate_prbs;
use arrow_sysid::Dataset;

fn main() -> arrow_sysid::Result<()> {
    let plant = SecondOrderModel::one_zero(2.64e-4, 0.285, 239.16, 1500.0)?;
    let dt = 1.0 / 4000.0;
    let force = generate_prbs(80_000, 5.0, 2, 8, dt)?;
    let disp = simulate_zoh(&plant, &force)?;
    let data = Dataset::new(dt, force.into_values(), disp.into_values())?;

    let opts = FitOptions::default();
    let nz = fit_parametric(&data, ModelKind::NoZero, None, &opts)?;
    let oz = fit_nested(&data, ModelKind::OneZero, &[&nz], &opts)?;
    let zp = fit_nested(&data, ModelKind::ZeroPair, &[&nz, &oz], &opts)?;

    println!("truth: {plant:?}");
    for f in [&nz, &oz, &zp] {
        println!(
            "{:<10} VAF {:>9.5}%  iterations {:>3}  {:?}",
            f.model.kind(),
            f.vaf_percent,
            f.iterations,
            f.model
        );
    }
    Ok(())
}
