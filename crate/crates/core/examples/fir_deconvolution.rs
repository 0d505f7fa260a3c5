//! Nonparametric identification: the FIR estimate recovered from noisy
//! data next to the true pulse response.

use arrow_sysid::estimation::{estimate_fir, nonparametric_vaf, pulse_response};
use arrow_sysid::models::{simulate_zoh, SecondOrderModel};
use arrow_sysid::signals::generate_prbs;
use arrow_sysid::Dataset;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

fn main() -> arrow_sysid::Result<()> {
    let plant = SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16)?;
    let dt = 1.0 / 4000.0;
    let force = generate_prbs(120_000, 5.0, 4, 3, dt)?;
    let clean = simulate_zoh(&plant, &force)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let noise = Normal::new(0.0, 2e-5).unwrap();
    let disp = clean
        .values()
        .iter()
        .map(|y| y + noise.sample(&mut rng))
        .collect();
    let data = Dataset::new(dt, force.into_values(), disp)?;

    let h = estimate_fir(&data, 1501)?;
    let truth = pulse_response(&plant, dt, h.taps.len());
    println!(
        "FIR span {:.3} s, VAF {:.2}%",
        h.span(),
        nonparametric_vaf(&data, &h)?
    );
    println!("   t [ms]      estimate         truth");
    for k in (0..120).step_by(8) {
        println!(
            "{:>9.2} {:>13.4e} {:>13.4e}",
            1e3 * k as f64 * dt,
            h.taps[k],
            truth[k]
        );
    }
    Ok(())
}
