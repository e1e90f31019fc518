//! Loads a scene file, prints its constraint ledger and the resolved JSON.
//!
//! cargo run --example scene_file -- fixtures/small_a.json

use std::path::PathBuf;

use wildclass::scene::{Model, Scene, SceneFile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from);
    let file = match &path {
        Some(p) => SceneFile::load(p)?,
        None => SceneFile::default(),
    };
    let scene = match Scene::new(file.params(Some(100.0))?) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("rejected: {e}");
            return Ok(());
        }
    };
    for e in scene.ledger() {
        println!("{:<28} {}", e.id, if e.satisfied { "ok" } else { "violated" });
    }
    let model = Model::build(&scene)?;
    println!("{}", SceneFile::from_scene(&scene, Some(model.solved_coefficients())).to_json());
    Ok(())
}
