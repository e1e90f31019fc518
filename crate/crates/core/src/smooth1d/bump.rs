//! Plateau bump functions `rho[a,b,c,d]` built from the `exp(-1/t)` smooth step.

use serde::{Deserialize, Serialize};

use super::{SmoothFn1D, SmoothError};

/// `e(t) = exp(-1/t)` for `t > 0`, else 0.
#[inline]
fn flat(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

#[inline]
fn flat_prime(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp() / (t * t)
    } else {
        0.0
    }
}

/// Smooth step `s(u) = e(u) / (e(u) + e(1-u))`: 0 for `u <= 0`, 1 for `u >= 1`.
#[inline]
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let p = flat(u);
    let q = flat(1.0 - u);
    p / (p + q)
}

/// Derivative of [`smooth_step`].
#[inline]
pub fn smooth_step_prime(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let p = flat(u);
    let q = flat(1.0 - u);
    let den = p + q;
    (flat_prime(u) * q + p * flat_prime(1.0 - u)) / (den * den)
}

/// Endpoints of a plateau bump. `c <= a <= b <= d`; `c` may be `-inf` and `d` may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BumpSpec {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    /// Symmetric bump `rho[-inner, inner, -outer, outer]`.
    pub fn symmetric(inner: f64, outer: f64) -> Self {
        Self::new(-inner, inner, -outer, outer)
    }
}

/// A validated plateau bump. Equal to 1 on `[a, b]`, 0 outside `[c, d]`.
///
/// When `c = -inf` the left transition is absent and the bump is 1 on
/// `(-inf, b]`; symmetrically for `d = +inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    spec: BumpSpec,
}

impl Bump {
    pub fn new(spec: BumpSpec) -> Result<Self, SmoothError> {
        let BumpSpec { a, b, c, d } = spec;
        if a.is_nan() || b.is_nan() || c.is_nan() || d.is_nan() {
            return Err(SmoothError::MalformedBump { spec, reason: "NaN endpoint" });
        }
        if a > b {
            return Err(SmoothError::MalformedBump { spec, reason: "a > b" });
        }
        if c > a {
            return Err(SmoothError::MalformedBump { spec, reason: "c > a" });
        }
        if d < b {
            return Err(SmoothError::MalformedBump { spec, reason: "d < b" });
        }
        if c.is_finite() && c == a {
            return Err(SmoothError::MalformedBump { spec, reason: "left transition has zero width" });
        }
        if d.is_finite() && d == b {
            return Err(SmoothError::MalformedBump { spec, reason: "right transition has zero width" });
        }
        Ok(Self { spec })
    }

    /// Unchecked constructor for internal constants known to be well formed.
    pub(crate) fn known(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(BumpSpec::new(a, b, c, d)).expect("internal bump constant is well formed")
    }

    pub fn spec(&self) -> BumpSpec {
        self.spec
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let BumpSpec { a, b, c, d } = self.spec;
        if t < a {
            if c == f64::NEG_INFINITY {
                return if t <= b { 1.0 } else { 0.0 };
            }
            if t <= c {
                return 0.0;
            }
            return smooth_step((t - c) / (a - c));
        }
        if t <= b {
            return 1.0;
        }
        if d == f64::INFINITY || t >= d {
            return if d == f64::INFINITY { 1.0 } else { 0.0 };
        }
        smooth_step((d - t) / (d - b))
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        let BumpSpec { a, b, c, d } = self.spec;
        if t < a {
            if !c.is_finite() || t <= c {
                return 0.0;
            }
            let w = a - c;
            return smooth_step_prime((t - c) / w) / w;
        }
        if t <= b || !d.is_finite() || t >= d {
            return 0.0;
        }
        let w = d - b;
        -smooth_step_prime((d - t) / w) / w
    }

    /// Finite transition endpoints, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let BumpSpec { a, b, c, d } = self.spec;
        let mut out: Vec<f64> = [c, a, b, d].into_iter().filter(|x| x.is_finite()).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// True when the bump is constant on `[lo, hi]`.
    pub fn is_flat_on(&self, lo: f64, hi: f64) -> bool {
        let BumpSpec { a, b, c, d } = self.spec;
        let left = (c.is_finite() && hi <= c) || (lo >= a && hi <= b) || (!c.is_finite() && hi <= b);
        let right = (d.is_finite() && lo >= d) || (!d.is_finite() && lo >= a);
        left || right
    }
}

/// Builds `rho[a,b,c,d]` as a [`SmoothFn1D`].
pub fn build_bump(spec: BumpSpec) -> Result<SmoothFn1D, SmoothError> {
    let bump = Bump::new(spec)?;
    let BumpSpec { a, b, c, d } = spec;
    let mut plateaus = vec![((a, b), 1.0)];
    if c.is_finite() {
        plateaus.push(((f64::NEG_INFINITY, c), 0.0));
    }
    if d.is_finite() {
        plateaus.push(((d, f64::INFINITY), 0.0));
    }
    let breakpoints = bump.breakpoints();
    Ok(SmoothFn1D::new(
        move |t| bump.value(t),
        move |t| bump.derivative(t),
        (c, d),
        plateaus,
        breakpoints,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_zero_region() {
        let r = Bump::known(0.0, 1.0, -1.0, 2.0);
        assert_eq!(r.value(0.5), 1.0);
        assert_eq!(r.value(3.0), 0.0);
        assert_eq!(r.value(-1.0), 0.0);
        assert_eq!(r.value(2.0), 0.0);
        assert_eq!(r.value(0.0), 1.0);
        let mid = r.value(-0.5);
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn infinite_left_endpoint_has_no_transition() {
        let r = Bump::known(0.0, 1.0, f64::NEG_INFINITY, 2.0);
        assert_eq!(r.value(-1e6), 1.0);
        assert_eq!(r.derivative(-1e6), 0.0);
        let r = Bump::known(f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY, 1.5);
        assert_eq!(r.value(-1e300), 1.0);
        assert_eq!(r.value(1.5), 0.0);
    }

    #[test]
    fn infinite_right_endpoint() {
        let r = Bump::known(3.0, f64::INFINITY, 2.0, f64::INFINITY);
        assert_eq!(r.value(1e12), 1.0);
        assert_eq!(r.value(2.0), 0.0);
        assert!(r.value(2.5) > 0.0 && r.value(2.5) < 1.0);
    }

    #[test]
    fn rejects_malformed() {
        assert!(Bump::new(BumpSpec::new(1.0, 0.0, -1.0, 2.0)).is_err());
        assert!(Bump::new(BumpSpec::new(0.0, 1.0, 0.5, 2.0)).is_err());
        assert!(Bump::new(BumpSpec::new(0.0, 1.0, -1.0, 0.5)).is_err());
        assert!(Bump::new(BumpSpec::new(0.0, 1.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn step_derivative_peak() {
        assert!((smooth_step_prime(0.5) - 2.0).abs() < 1e-14);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flatness_predicate() {
        let r = Bump::known(7.0 / 5.0, 8.0 / 5.0, 6.0 / 5.0, 9.0 / 5.0);
        assert!(r.is_flat_on(0.0, 1.2));
        assert!(r.is_flat_on(1.4, 1.6));
        assert!(r.is_flat_on(1.8, 1e6));
        assert!(!r.is_flat_on(1.0, 1.3));
    }
}
