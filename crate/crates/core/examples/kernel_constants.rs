//! Prints the Epanechnikov self-convolutions at zero and the rule-of-thumb
//! bandwidth constant.
//!
//! cargo run --example kernel_constants

use dr_dose::kernel::rot_constant;
use dr_dose::{convolution_at_zero, Epanechnikov, Kernel};

fn main() -> dr_dose::Result<()> {
    let k = Epanechnikov;
    println!("kernel {}: roughness {}, second moment {}", k.name(), k.roughness(), k.second_moment());
    for s in 1..=4 {
        println!("{}-fold product at 0: {:.12}", s + 1, convolution_at_zero(&k, s)?);
    }
    println!("rule-of-thumb constant {:.12} (15^(1/5) = {:.12})", rot_constant(&k), 15f64.powf(0.2));
    Ok(())
}
