//! Eigenvalues of dOmega at the two saddles.
//!
//! cargo run --release --example fixed_point_spectra -- 100

use wildclass::cli::SpectrumReport;
use wildclass::scene::{Model, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lambda: f64 = std::env::args().nth(1).map_or(Ok(100.0), |s| s.parse())?;
    let model = Model::build(&Scene::default_with_lambda(lambda)?)?;
    let pts = model.scene.points();
    for (name, x) in [("P", pts.p), ("Q", pts.q), ("far", [3e6, 0.0, 0.0, 0.0])] {
        let r = SpectrumReport::new(&model.omega, lambda, x, "-")?;
        println!("{name}: index {:?}, non-real {}, displacement {:e}", r.index, r.non_real, r.displacement);
        for e in &r.eigenvalues {
            println!("    {:>12.6} {:+12.6}i   |.| = {:.6}", e.re, e.im, e.modulus);
        }
    }
    Ok(())
}
