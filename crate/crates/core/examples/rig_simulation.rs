//! Runs a voltage command through the simulated rig and identifies the
//! plant from what the rig recorded.

use arrow_sysid::estimation::{estimate_fir, fit_parametric, nonparametric_vaf, FitOptions};
use arrow_sysid::models::{ModelKind, SecondOrderModel};
use arrow_sysid::rigsim::simulate_rig;
use arrow_sysid::signals::generate_prbs;
use arrow_sysid::RigConfig;

fn peak(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn main() -> arrow_sysid::Result<()> {
    let plant = SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16)?;
    let mut cfg = RigConfig::new(plant);
    cfg.displacement_noise_std = 2e-5;
    cfg.seed = 41;
    let cmd = generate_prbs(120_000, 6.0, 8, 5, cfg.dt())?;
    let out = simulate_rig(&cfg, &cmd)?;

    println!("peak current  {:.3} A", peak(&out.truth.current));
    println!("peak force    {:.2} N", peak(&out.truth.force));
    println!(
        "peak travel   {:.3} mm",
        1e3 * peak(&out.truth.displacement)
    );

    let data = &out.dataset;
    let fir = estimate_fir(data, 1501)?;
    let fit = fit_parametric(data, ModelKind::NoZero, None, &FitOptions::default())?;
    println!("FIR VAF {:.2}%", nonparametric_vaf(data, &fir)?);
    println!(
        "fit VAF {:.2}%  zeta {:.4} (truth {})  omega {:.2} (truth {})",
        fit.vaf_percent, fit.model.zeta, plant.zeta, fit.model.omega, plant.omega
    );
    Ok(())
}
