use serde::{Deserialize, Serialize};

use super::{SmoothError, SmoothFn1D};

/// A coefficient fixed by an integral constraint, with its achieved residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedCoefficient {
    pub value: f64,
    pub target: f64,
    pub integral: f64,
    pub residual: f64,
    pub iterations: usize,
}

const MAX_DOUBLINGS: usize = 200;
const MAX_BISECTIONS: usize = 120;

/// Finds `alpha` with `integral(family(alpha), interval) = target` for a family
/// whose integral is continuous and increasing in `alpha`.
///
/// Without a `bracket` the search starts at `[-1, 1]` and doubles the
/// violated side until the target is enclosed.
pub fn solve_monotone_coefficient<F>(
    family: F,
    target: f64,
    interval: (f64, f64),
    bracket: Option<(f64, f64)>,
) -> Result<SolvedCoefficient, SmoothError>
where
    F: Fn(f64) -> SmoothFn1D,
{
    let integral = |alpha: f64| family(alpha).integrate(interval.0, interval.1);
    let tol = 1e-10 * target.abs().max(1.0);

    let (mut lo, mut hi) = bracket.unwrap_or((-1.0, 1.0));
    let mut f_lo = integral(lo)?;
    let mut f_hi = integral(hi)?;
    let mut doublings = 0;
    while f_lo > target || f_hi < target {
        if doublings >= MAX_DOUBLINGS {
            return Err(SmoothError::BracketExpansion { target, doublings });
        }
        let width = 2.0 * (hi - lo);
        if f_lo > target {
            hi = lo;
            f_hi = f_lo;
            lo -= width;
            f_lo = integral(lo)?;
        } else {
            lo = hi;
            f_lo = f_hi;
            hi += width;
            f_hi = integral(hi)?;
        }
        doublings += 1;
    }

    // bisect to the resolution of f64, keeping the best midpoint
    let mut best: Option<(f64, f64)> = None;
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = integral(mid)?;
        if best.map_or(true, |(_, fb)| (f_mid - target).abs() < (fb - target).abs()) {
            best = Some((mid, f_mid));
        }
        if f_mid == target {
            break;
        }
        if f_mid > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (value, integral) = match best {
        Some(b) => b,
        None => {
            if (f_lo - target).abs() <= (f_hi - target).abs() {
                (lo, f_lo)
            } else {
                (hi, f_hi)
            }
        }
    };
    let residual = integral - target;
    if residual.abs() > tol {
        return Err(SmoothError::CoefficientResidual { target, residual });
    }
    Ok(SolvedCoefficient { value, target, integral, residual, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth1d::{build_bump, BumpSpec};

    #[test]
    fn linear_family() {
        let family = |a: f64| SmoothFn1D::new(move |_| a, |_| 0.0, (0.0, 1.0), vec![((0.0, 1.0), a)], vec![]);
        let s = solve_monotone_coefficient(family, 1.0, (0.0, 1.0), None).unwrap();
        assert!((s.value - 1.0).abs() < 1e-10);
        assert!(s.residual.abs() <= 1e-10);
    }

    #[test]
    fn exponential_family_negative_root() {
        // integral of exp(a * rho) over the plateau [0,1] equals exp(a)
        let rho = build_bump(BumpSpec::new(0.0, 1.0, -0.5, 1.5)).unwrap();
        let family = move |a: f64| {
            let r = rho.clone();
            let r2 = rho.clone();
            SmoothFn1D::new(
                move |t| (a * r.value(t)).exp(),
                move |t| a * r2.derivative(t) * (a * r2.value(t)).exp(),
                (f64::NEG_INFINITY, f64::INFINITY),
                vec![((0.0, 1.0), a.exp())],
                vec![0.0, 1.0],
            )
        };
        let s = solve_monotone_coefficient(family, 0.01, (0.0, 1.0), None).unwrap();
        // integral tolerance 1e-10 at slope exp(a) = 0.01
        assert!(s.residual.abs() <= 1e-10);
        assert!((s.value - 0.01f64.ln()).abs() < 2e-8);
    }

    #[test]
    fn unreachable_target_is_a_bracket_error() {
        let family = |_a: f64| SmoothFn1D::new(|_| 1.0, |_| 0.0, (0.0, 1.0), vec![((0.0, 1.0), 1.0)], vec![]);
        let err = solve_monotone_coefficient(family, 5.0, (0.0, 1.0), None).unwrap_err();
        assert!(matches!(err, SmoothError::BracketExpansion { .. }));
    }
}
