//! Poles, zeros and a coarse frequency response for each model family.

use arrow_sysid::models::{bode, transfer_function};
use arrow_sysid::SecondOrderModel;

fn main() -> arrow_sysid::Result<()> {
    let models = [
        SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16)?,
        SecondOrderModel::one_zero(2.64e-4, 0.285, 239.16, 1500.0)?,
        SecondOrderModel::zero_pair(2.64e-4, 0.285, 239.16, 900.0, 0.2)?,
    ];
    let grid = [10.0, 100.0, 239.16, 1000.0, 5000.0];
    for m in &models {
        let tf = transfer_function(m)?;
        println!("{}", m.kind());
        for p in &tf.poles {
            println!("  pole {:+.2} {:+.2}i", p.re, p.im);
        }
        for z in &tf.zeros {
            println!("  zero {:+.2} {:+.2}i", z.re, z.im);
        }
        for (w, (mag, phase)) in grid.iter().zip(bode(m, &grid)?) {
            println!(
                "  {w:>8.2} rad/s  |H| {mag:.4e} m/N  phase {:>7.1} deg",
                phase.to_degrees()
            );
        }
    }
    Ok(())
}
