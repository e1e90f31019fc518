//! Deterministic point sets and order-independent reductions over them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::extalg4::Vec4;

/// Cell-centred product grid over a closed box: `n` points per axis at
/// `lo + (i + 1/2) (hi - lo) / n`, so open boxes are sampled too.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    pub bounds: [[f64; 2]; 4],
    pub n: usize,
}

impl BoxGrid {
    pub fn new(bounds: [[f64; 2]; 4], n: usize) -> Self {
        Self { bounds, n }
    }

    pub fn len(&self) -> usize {
        self.n.pow(4)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0 || self.bounds.iter().any(|b| !(b[0] <= b[1]))
    }

    /// Point with linear index `k`; the first axis varies slowest.
    pub fn point(&self, k: usize) -> Vec4 {
        let n = self.n;
        let idx = [k / (n * n * n), (k / (n * n)) % n, (k / n) % n, k % n];
        [0, 1, 2, 3].map(|i| {
            let [lo, hi] = self.bounds[i];
            lo + (idx[i] as f64 + 0.5) * (hi - lo) / n as f64
        })
    }
}

/// Endpoint-inclusive product grid with `n >= 2` nodes per axis, for
/// closed boxes whose corners matter.
pub fn inclusive_grid(bounds: [[f64; 2]; 4], n: usize) -> Vec<Vec4> {
    let node = |i: usize, k: usize| bounds[i][0] + (bounds[i][1] - bounds[i][0]) * k as f64 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    out.push([node(0, a), node(1, b), node(2, c), node(3, d)]);
                }
            }
        }
    }
    out
}

/// `count` nonzero abscissae in `[-r, r]`: half log-spaced down to
/// `r * 10^-decades`, half evenly spaced, mirrored to both signs.
pub fn signed_samples(r: f64, count: usize, decades: f64) -> Vec<f64> {
    let per_side = (count / 2).max(2);
    let logs = per_side / 2;
    let lins = per_side - logs;
    let mut out = Vec::with_capacity(2 * per_side);
    for k in 0..logs {
        let e = -decades * k as f64 / (logs - 1).max(1) as f64;
        out.push(r * 10f64.powf(e));
    }
    for k in 1..=lins {
        out.push(r * k as f64 / lins as f64);
    }
    let neg: Vec<f64> = out.iter().map(|x| -x).collect();
    out.extend(neg);
    out
}

/// Points of a regular grid on every facet of a box: for each axis and
/// side, the facet coordinate is pinned and the other three run over `n`
/// endpoint-inclusive values.
pub fn facet_points(bounds: [[f64; 2]; 4], n: usize) -> Vec<Vec4> {
    let node = |i: usize, k: usize| {
        let [lo, hi] = bounds[i];
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(8 * n * n * n);
    for axis in 0..4 {
        for side in 0..2 {
            let free: Vec<usize> = (0..4).filter(|&i| i != axis).collect();
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut x = [0.0; 4];
                        x[axis] = bounds[axis][side];
                        x[free[0]] = node(free[0], a);
                        x[free[1]] = node(free[1], b);
                        x[free[2]] = node(free[2], c);
                        out.push(x);
                    }
                }
            }
        }
    }
    out
}

fn radical_inverse(mut k: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut out = 0.0;
    let mut scale = inv;
    while k > 0 {
        out += (k % base) as f64 * scale;
        k /= base;
        scale *= inv;
    }
    out
}

/// First `count` points of the 4D Halton sequence (bases 2, 3, 5, 7) in
/// `[0, 1)^4`, shifted modulo 1 by a seeded offset.
pub fn halton4(count: usize, seed: u64) -> Vec<Vec4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec4 = [0; 4].map(|_| rng.gen::<f64>());
    (1..=count as u64)
        .map(|k| {
            let h = [radical_inverse(k, 2), radical_inverse(k, 3), radical_inverse(k, 5), radical_inverse(k, 7)];
            [0, 1, 2, 3].map(|i| (h[i] + shift[i]).fract())
        })
        .collect()
}

/// Seeded uniform points in a box.
pub fn uniform_in(bounds: [[f64; 2]; 4], count: usize, seed: u64) -> Vec<Vec4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| [0, 1, 2, 3].map(|i| rng.gen_range(bounds[i][0]..=bounds[i][1]))).collect()
}

/// Minimum of `f` over indices `0..n` with its index; ties go to the
/// smaller index, so the result does not depend on the thread count.
/// NaN values win, so a broken evaluation cannot hide.
pub fn par_argmin<F>(n: usize, f: F) -> Option<(f64, usize)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    (0..n).into_par_iter().map(|k| (f(k), k)).reduce_with(|a, b| if better(a, b) { a } else { b })
}

/// Whether `a` precedes `b` in the reduction order of [`par_argmin`].
pub fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    match (a.0.is_nan(), b.0.is_nan()) {
        (true, true) => a.1 < b.1,
        (true, false) => true,
        (false, true) => false,
        _ => a.0 < b.0 || (a.0 == b.0 && a.1 < b.1),
    }
}

/// Order-independent maximum with the same tie and NaN rules.
pub fn par_argmax<F>(n: usize, f: F) -> Option<(f64, usize)>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    par_argmin(n, |k| -f(k)).map(|(v, k)| (-v, k))
}
