//! Full verification at a fixed lambda with a light grid.
//!
//! cargo run --release --example verify -- 100 8

use wildclass::scene::Scene;
use wildclass::verifier::{run_all, VerificationConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let lambda: f64 = args.next().map_or(Ok(100.0), |s| s.parse())?;
    let grid: usize = args.next().map_or(Ok(8), |s| s.parse())?;
    let cfg = VerificationConfig { lambda: Some(lambda), grid, ..VerificationConfig::default() };
    let report = run_all(&Scene::default_with_lambda(lambda)?, &cfg)?;
    print!("{}", report.summary());
    for id in report.failures() {
        if let Some(c) = report.get(id) {
            println!("{id}: {:?}", c.measured);
        }
    }
    Ok(())
}
