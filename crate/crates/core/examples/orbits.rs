//! Orbits that make up the cycle, written as CSV to stdout.
//!
//! cargo run --release --example orbits > orbits.csv

use std::io::Write;

use wildclass::cli::{write_orbit, OrbitDirection};
use wildclass::scene::{Model, Scene};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scene = Scene::default_with_lambda(100.0)?;
    let model = Model::build(&scene)?;
    let pts = scene.points();
    let runs = [
        ("midpoint forward to Q", [0.0, 5.0, 0.0, 0.0], OrbitDirection::Forward, 40),
        ("midpoint backward to P", [0.0, 5.0, 0.0, 0.0], OrbitDirection::Backward, 40),
        ("C4 forward to P", pts.c4, OrbitDirection::Forward, 12),
        ("C4 backward to Q", pts.c4, OrbitDirection::Backward, 6),
    ];
    let mut out = std::io::stdout().lock();
    for (label, start, dir, steps) in runs {
        writeln!(out, "# {label}")?;
        write_orbit(&mut out, &scene, &model.omega, "example", start, dir, steps)?;
    }
    Ok(())
}
