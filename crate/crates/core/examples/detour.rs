//! The box-translation detour: a rigid shift near C1, the identity away
//! from the tubes, and the image of C1 itself.
//!
//! cargo run --release --example detour

use wildclass::maps4d::DiffeoMap4;
use wildclass::scene::{Model, Scene, DETOUR_SHIFT};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = Model::build(&Scene::default_with_lambda(100.0)?)?;
    let ups = model.upsilon.as_ref();
    let c1 = model.scene.points().c1;
    println!("Upsilon(C1) = {:?}  (shift {:?})", ups.eval(c1), DETOUR_SHIFT);
    for chi in &model.chis {
        let (from, to) = chi.endpoints();
        println!("leg {from:?} -> {to:?}, radii {:?}", chi.radii());
    }
    let probe = [c1[0] + 0.15, c1[1] - 0.1, c1[2] + 0.05, c1[3]];
    let y = ups.eval(probe);
    println!("near C1: {probe:?} -> {y:?}");
    let away = [0.0, 5.0, 0.0, 0.0];
    println!("on the y-axis: {away:?} -> {:?}", ups.eval(away));
    let back = ups.inverse(y)?;
    println!("inverse round trip error {:e}", (0..4).map(|i| (back[i] - probe[i]).abs()).fold(0.0, f64::max));
    Ok(())
}
