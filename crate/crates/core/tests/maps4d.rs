use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wildclass::extalg4::{Mat4, Vec4};
use wildclass::maps4d::DiffeoMap4;
use wildclass::scene::{Model, Scene, DETOUR_SHIFT};

fn model(lambda: f64) -> Model {
    Model::build(&Scene::default_with_lambda(lambda).unwrap()).unwrap()
}

fn sup(a: Vec4, b: Vec4) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

fn euclid(a: Vec4, b: Vec4) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

fn in_box(rng: &mut ChaCha8Rng, c: Vec4, r: [f64; 4]) -> Vec4 {
    std::array::from_fn(|i| c[i] + rng.gen_range(-r[i]..r[i]))
}

/// Central differences with a step scaled to each coordinate.
fn central(map: &dyn DiffeoMap4, x: Vec4, h: f64) -> Mat4 {
    let mut j = Mat4::ZERO;
    for c in 0..4 {
        let s = h * x[c].abs().max(1.0);
        let (mut a, mut b) = (x, x);
        a[c] += s;
        b[c] -= s;
        let (fa, fb) = (map.eval(a), map.eval(b));
        for r in 0..4 {
            j.0[r][c] = (fa[r] - fb[r]) / (2.0 * s);
        }
    }
    j
}

/// Points spread over `A`, the neighbourhoods of `P` and `Q`, the detour
/// tubes and the thin slab of `C`.
fn mixed_points(m: &Model, count: usize, seed: u64) -> Vec<Vec4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = m.scene.points();
    let zw = m.scene.zw_extent();
    let rl = m.theta.radii().outer;
    let tubes = m.scene.regions().tubes.clone();
    (0..count)
        .map(|k| match k % 5 {
            0 => in_box(&mut rng, [0.0; 4], [20.0, 20.0, zw, zw]),
            1 => in_box(&mut rng, pts.p, [1.2 * rl; 4]),
            2 => in_box(&mut rng, pts.q, [1.2 * rl; 4]),
            3 => {
                let bb = tubes[k % 3].bounding_box();
                std::array::from_fn(|i| rng.gen_range(bb[i][0]..bb[i][1]))
            }
            _ => in_box(&mut rng, [0.0; 4], [20.0, 20.0, 1.0, 1.0]),
        })
        .collect()
}

#[test]
fn theta_is_a_quarter_turn_on_the_small_boxes() {
    let m = model(100.0);
    let s = m.theta.radii().small_box() * 0.99;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let d = in_box(&mut rng, [0.0; 4], [s; 4]);
        let yp = m.theta.eval(d);
        assert!(sup(yp, [d[0], -d[2], d[1], d[3]]) <= 1e-15, "{d:?} -> {yp:?}");
        let x = [d[0], d[1] + 10.0, d[2], d[3]];
        let yq = m.theta.eval(x);
        assert!(sup(yq, [-d[1], d[0] + 10.0, -d[3], d[2]]) <= 1e-14, "{x:?} -> {yq:?}");
    }
}

#[test]
fn theta_fixes_the_x_axis_and_preserves_distances() {
    let m = model(100.0);
    for k in 0..100 {
        let x = [-1.0 + 0.02 * k as f64, 0.0, 0.0, 0.0];
        assert_eq!(m.theta.eval(x), x);
    }
    let pts = m.scene.points();
    let rl = m.theta.radii().outer;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..500 {
        for c in [pts.p, pts.q] {
            let x = in_box(&mut rng, c, [rl; 4]);
            let y = m.theta.eval(x);
            assert!((euclid(y, c) - euclid(x, c)).abs() <= 1e-15, "{x:?}");
            assert!(sup(m.theta.inverse(y).unwrap(), x) <= 1e-14);
        }
    }
}

#[test]
fn psi_inverse_and_product_form() {
    let m = model(100.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let x = in_box(&mut rng, [0.0; 4], [30.0, 30.0, 2e4, 2e4]);
        let y = m.psi.eval(x);
        assert_eq!(y, m.psi.product(x));
        let back = m.psi.inverse(y).unwrap();
        assert!(sup(back, x) <= 1e-9 * x.iter().fold(1.0, |a: f64, v| a.max(v.abs())), "{x:?}");
    }
}

#[test]
fn upsilon_plateau_and_exterior_identity() {
    let m = model(100.0);
    let ups = m.upsilon.as_ref();
    let c1 = m.scene.points().c1;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let x = in_box(&mut rng, c1, [0.2; 4]);
        let y = ups.eval(x);
        let shift: Vec4 = std::array::from_fn(|i| y[i] - x[i]);
        assert!(sup(shift, DETOUR_SHIFT) <= 1e-12, "{x:?}: {shift:?}");
    }
    let d = &m.scene.regions().d;
    let mut probes = 0;
    while probes < 100 {
        let x = in_box(&mut rng, [5.0, 5.0, 0.0, 0.0], [20.0, 20.0, 20.0, 20.0]);
        if d.distance(x) > 1e-9 {
            assert_eq!(ups.eval(x), x);
            probes += 1;
        }
    }
}

/// `H` and `G` climb with slopes near 1e6 just below `lambda^3`, where f64
/// spacing is 1.2e-10, so `Omega(Omega^-1(Y))` can only be as exact as
/// `dOmega` at the preimage times the spacing of the preimage.
#[test]
fn omega_inverse_round_trips_on_a_within_conditioning() {
    let m = model(100.0);
    let zw = m.scene.zw_extent();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let y = in_box(&mut rng, [0.0; 4], [20.0, 20.0, zw, zw]);
        let x = m.omega.inverse(y).unwrap();
        let e = m.omega.eval(x);
        let j = m.omega.jacobian(x);
        for r in 0..4 {
            let cond: f64 = (0..4).map(|c| j.0[r][c].abs() * x[c].abs().max(1.0)).sum();
            let budget = 8.0 * f64::EPSILON * cond + 1e-12 * y[r].abs().max(1.0);
            worst = worst.max((e[r] - y[r]).abs() / budget);
        }
    }
    assert!(worst <= 1.0, "worst error/budget {worst}");
}

#[test]
fn omega_inverse_undoes_omega_on_a() {
    let m = model(100.0);
    let zw = m.scene.zw_extent();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..1000 {
        let x = in_box(&mut rng, [0.0; 4], [20.0, 20.0, zw, zw]);
        let back = m.omega.inverse(m.omega.eval(x)).unwrap();
        assert!(sup(back, x) <= 1e-8, "{x:?} -> {back:?}");
    }
}

#[test]
fn jacobians_match_central_differences() {
    for lambda in [100.0, 400.0] {
        let m = model(lambda);
        let mut worst = (0.0f64, [0.0; 4], "");
        for (name, map) in [("omega", &m.omega as &dyn DiffeoMap4), ("phi", &m.phi)] {
            for x in mixed_points(&m, 1000, 6) {
                let j = map.jacobian(x);
                let scale = j.0.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
                let err = j.max_abs_diff(&central(map, x, 1e-7)) / scale;
                if err > worst.0 {
                    worst = (err, x, name);
                }
            }
        }
        assert!(worst.0 <= 1e-5, "lambda {lambda}: {worst:?}");
    }
}

#[test]
fn backward_orbit_of_c4_lies_in_the_q_plane() {
    let lambda = 100.0;
    let m = model(lambda);
    let mut x = m.scene.points().c4;
    for n in 1..=4 {
        x = m.omega.inverse(x).unwrap();
        let r = x[2].hypot(x[3]);
        let want = 5.0 / lambda.powi(n);
        assert!(x[0].abs() < 1e-9 && (x[1] - 10.0).abs() < 1e-9, "step {n}: {x:?}");
        assert!((r - want).abs() <= 1e-9 * want, "step {n}: {r:e} vs {want:e}");
    }
}
