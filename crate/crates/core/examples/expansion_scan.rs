//! The expansion constants and the direct minimum of m(wedge3 dOmega) on C.
//!
//! cargo run --release --example expansion_scan -- 100 10

use wildclass::scene::{Model, Scene};
use wildclass::verifier::{check_expansion, expansion_constants, VerificationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().map_or(Ok(100.0), |s| s.parse())?;
    let grid: usize = args.next().map_or(Ok(10), |s| s.parse())?;
    let cfg = VerificationConfig { lambda: Some(lambda), grid, ..VerificationConfig::default() };
    let model = Model::build(&Scene::default_with_lambda(lambda)?)?;

    let k = expansion_constants(&model, &cfg);
    println!("c1 = {:.6e}, c2 = {:.6e}, c = {:.6e}", k.c1, k.c2, k.c);
    println!("c_Theta   grid {grid}: {:.6e}, grid {}: {:.6e}", k.c_theta[0], 2 * grid, k.c_theta[1]);
    println!("c_Upsilon grid {grid}: {:.6e}, grid {}: {:.6e} at {:?}", k.c_upsilon[0], 2 * grid, k.c_upsilon[1], k.c_upsilon_witness);
    println!("factorized bound at lambda {lambda}: {:.6e}", k.bound(lambda, true));
    println!("lambda the factorized bound needs: {:.3e}", k.lambda_needed(true));

    let e = check_expansion(&model, &k, &cfg, true);
    let (m, w) = e.omega_min();
    println!("direct min over C: {m:.6e} at {w:?}");
    if let Some(d) = e.disagreement {
        println!("coarse/refined relative disagreement: {d:.3}");
    }
    Ok(())
}
