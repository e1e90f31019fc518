//! Plateau bumps: value and derivative across both transitions.
//!
//! cargo run --example bumps

use wildclass::smooth1d::{Bump, BumpSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let rho = Bump::new(BumpSpec::new(-1.0, 1.0, -2.0, 2.0))?;
    println!("t,rho,rho_prime");
    for k in 0..=32 {
        let t = -2.5 + 5.0 * k as f64 / 32.0;
        println!("{t},{},{}", rho.value(t), rho.derivative(t));
    }
    // one-sided: 1 on (-inf, 0], 0 from 3 on
    let step = Bump::new(BumpSpec::new(f64::NEG_INFINITY, 0.0, f64::NEG_INFINITY, 3.0))?;
    eprintln!("one-sided at -1e9: {}, at 1.5: {:.6}, at 3: {}", step.value(-1e9), step.value(1.5), step.value(3.0));
    Ok(())
}
