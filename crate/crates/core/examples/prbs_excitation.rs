//! Generates a binary excitation and shows why it suits correlation
//! analysis: a flat level distribution and an autocorrelation that falls
//! to zero once the lag exceeds the hold length.

use arrow_sysid::signals::{correlation, generate_prbs};

fn main() -> arrow_sysid::Result<()> {
    let dt = 1.0 / 4000.0;
    let hold = 4;
    let u = generate_prbs(40_000, 3.0, hold, 11, dt)?;

    let high = u.values().iter().filter(|&&v| v > 0.0).count();
    let switches = u.values().windows(2).filter(|w| w[0] != w[1]).count();
    println!("samples {}  high {high}  switches {switches}", u.len());

    let r = correlation(&u, &u, 3 * hold)?;
    println!("lag  r_uu/r_uu[0]");
    for (k, v) in r.values.iter().enumerate() {
        println!("{k:>3}  {:+.4}", v / r.values[0]);
    }
    Ok(())
}
