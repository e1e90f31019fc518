//! Adaptive Gauss–Kronrod (7/15) quadrature.

use super::SmoothError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel; returns `(estimate, error)`.
/// Kronrod estimate, Kronrod-Gauss error, and the spread of sampled values.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let (mut fmin, mut fmax) = (fc, fc);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (fl, fr) = (f(center - dx), f(center + dx));
        fmin = fmin.min(fl).min(fr);
        fmax = fmax.max(fl).max(fr);
        let s = fl + fr;
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs(), fmax - fmin)
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<f64, SmoothError> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, abs_tol, rel_tol).map(|v| -v);
    }
    // Bisection on the panel with the largest error estimate.
    let (v0, e0, r0) = gk15(f, a, b);
    let mut panels: Vec<(f64, f64, f64, f64)> = vec![(a, b, v0, e0)];
    // Far from the origin the abscissae are coarse: each sample carries a
    // jitter of about ulp(x) |f'|, which no amount of refinement removes.
    let scale = a.abs().max(b.abs());
    let mut spread = vec![r0];
    let mut total = v0;
    let mut err = e0;
    const MAX_PANELS: usize = 4000;
    // below this the estimate is dominated by rounding in the panel sums
    let roundoff = |p: &[(f64, f64, f64, f64)], spread: &[f64]| {
        let sum_abs: f64 = p.iter().map(|q| q.2.abs()).sum();
        let jitter: f64 = spread.iter().sum::<f64>() * scale;
        f64::EPSILON * (100.0 * sum_abs + 4.0 * jitter)
    };
    while err > abs_tol.max(rel_tol * total.abs()).max(roundoff(&panels, &spread)) {
        if panels.len() >= MAX_PANELS {
            return Err(SmoothError::Quadrature { a, b, estimate: total, error: err });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (lo, hi, v, e) = panels.swap_remove(idx);
        let r = spread.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Panel cannot be split further; accept it as is.
            panels.push((lo, hi, v, 0.0));
            spread.push(r);
            err -= e;
            continue;
        }
        let (v1, e1, r1) = gk15(f, lo, mid);
        let (v2, e2, r2) = gk15(f, mid, hi);
        total += v1 + v2 - v;
        err += e1 + e2 - e;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
        spread.push(r1);
        spread.push(r2);
        if !total.is_finite() {
            return Err(SmoothError::Quadrature { a, b, estimate: total, error: err });
        }
    }
    // Re-sum for accuracy after many incremental updates.
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Integrates over `[a, b]` splitting at `breakpoints`; subintervals on
/// which `is_flat` holds are integrated exactly from the midpoint value.
pub fn integrate_piecewise<F, P>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    is_flat: P,
    rel_tol: f64,
) -> Result<f64, SmoothError>
where
    F: Fn(f64) -> f64,
    P: Fn(f64, f64) -> bool,
{
    if b < a {
        return integrate_piecewise(f, b, a, breakpoints, is_flat, rel_tol).map(|v| -v);
    }
    let mut cuts: Vec<f64> = vec![a];
    cuts.extend(breakpoints.iter().copied().filter(|&t| t > a && t < b));
    cuts.push(b);
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        if is_flat(lo, hi) {
            sum += f(0.5 * (lo + hi)) * (hi - lo);
        } else {
            sum += integrate(f, lo, hi, 1e-15, rel_tol)?;
        }
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate(&|x: f64| x.powi(5) - 3.0 * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - (64.0 / 6.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn peaked_integrand() {
        let v = integrate(&|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-14, 1e-13).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-11);
    }

    #[test]
    fn reversed_limits() {
        let v = integrate(&|x: f64| x, 1.0, 0.0, 1e-14, 1e-14).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn piecewise_flat_segments() {
        let f = |x: f64| if x < 1.0 { 2.0 } else { 3.0 };
        let v = integrate_piecewise(&f, 0.0, 2.0, &[1.0], |_, _| true, 1e-14).unwrap();
        assert_eq!(v, 5.0);
    }
}
