//! Converts a fitted model into mass, damping and stiffness and checks the
//! stiffness against the arrow's static spine rating.

use arrow_sysid::estimation::extract_lumped;
use arrow_sysid::models::{expected_frequency, stiffness_from_static_spine};
use arrow_sysid::{SecondOrderModel, SpineRating};

fn main() -> arrow_sysid::Result<()> {
    let fitted = SecondOrderModel::no_zero(2.64e-4, 0.285, 239.16)?;
    let l = extract_lumped(&fitted)?;
    println!(
        "mass {:.2} g  damping {:.3} Ns/m  stiffness {:.1} N/m",
        1e3 * l.mass,
        l.damping,
        l.stiffness
    );

    for spine in [300.0, 400.0, 500.0, 600.0] {
        let k = stiffness_from_static_spine(SpineRating::from_spine_number(spine)?)?;
        let f = expected_frequency(k, l.mass)?;
        println!(
            "spine {spine:>3}: static stiffness {k:>7.1} N/m, {f:>6.2} Hz with the fitted mass"
        );
    }
    Ok(())
}
