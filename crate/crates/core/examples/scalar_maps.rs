//! The one-dimensional maps F, G, H at a chosen lambda.
//!
//! cargo run --release --example scalar_maps -- 100

use wildclass::smooth1d::{build_f, build_g, build_h, ScalarMap1D};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda: f64 = std::env::args().nth(1).map_or(Ok(100.0), |s| s.parse())?;
    let (f, g, h) = (build_f(lambda)?, build_g(lambda)?, build_h(lambda)?);

    println!("F(1) = {:.12}", f.value(1.0));
    println!("G'(0) = {:.9}, G'(10) = {:.9}", g.derivative(0.0), g.derivative(10.0));
    println!("H(0.5) = {}, H(2) = {:.10}", h.value(0.5), h.value(2.0));
    println!("H(lambda^2) = {:.10}", h.value(lambda * lambda));
    println!("alpha0 = {:?}", h.alpha0());
    println!("beta0  = {:?}", h.beta0());

    let mut y: f64 = 5.0;
    let mut n = 0;
    while (y - 10.0).abs() > 1e-8 && n < 500 {
        y = g.value(y);
        n += 1;
    }
    println!("G^n(5) within 1e-8 of 10 after {n} steps");
    let mut y: f64 = 5.0;
    let mut n = 0;
    while y.abs() > 1e-8 && n < 500 {
        y = g.inverse(y)?;
        n += 1;
    }
    println!("G^-n(5) within 1e-8 of 0 after {n} steps");
    Ok(())
}
