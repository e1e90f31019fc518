//! Third exterior power of a 4x4 matrix and its singular values.
//!
//! cargo run --example exterior_algebra

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wildclass::extalg4::{conorm, singular_values, wedge3, Mat4};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = Mat4(std::array::from_fn(|_| std::array::from_fn(|_| rng.gen_range(-2.0..2.0))));
    let w = wedge3(&m);
    let s = singular_values(&m);
    println!("sigma(M)         = {s:?}");
    println!("sigma(wedge3 M)  = {:?}", singular_values(&w));
    let triples = [s[0] * s[1] * s[2], s[0] * s[1] * s[3], s[0] * s[2] * s[3], s[1] * s[2] * s[3]];
    println!("triple products  = {triples:?}");
    println!("m(wedge3 M) = {:.12}, s1 s2 s3 of the smallest = {:.12}", conorm(&w), triples[3]);
    println!("det M = {:.12}, det wedge3 M = {:.12} (= det^3)", m.det(), w.det());
}
