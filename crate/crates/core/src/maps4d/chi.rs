//! Box translation along an axis-aligned leg from `Y` to `Z`.
//!
//! In the leg frame `s = sigma (X_k - Y_k)` the map is
//! `s -> s + R(t) (kappa(s) - s)` with `R` the product of `rho[-c, c, -b, b]`
//! over the three transverse offsets `t`. The profile `kappa` is the identity
//! off `[-b, zeta + b]`, the translation `s + zeta` on `[-c, c]`, and
//! `kappa' = eta > 0` throughout.

use serde::{Deserialize, Serialize};

use super::{DiffeoMap4, MapError, Support};
use crate::extalg4::{Mat4, Vec4};
use crate::smooth1d::quadrature::integrate;
use crate::smooth1d::{bracketed_newton, solve_monotone_coefficient, Bump, SmoothFn1D, SolvedCoefficient};

/// Width of the transition zones of the two `eta` bumps.
pub const CHI_MARGIN: f64 = 0.04;

/// Coordinate axis of a leg and its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegFrame {
    pub axis: usize,
    pub forward: bool,
}

impl LegFrame {
    fn sign(&self) -> f64 {
        if self.forward {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    base: f64,
    top: f64,
    flat: Option<f64>,
}

/// `kappa(s) = -b + int_{-b}^s eta` with
/// `eta = exp(alpha rho[-b+e, -c-e, -b, -c] + beta rho[c+e, zeta+b-e, c, zeta+b])`.
#[derive(Debug, Clone)]
pub struct Kappa {
    zeta: f64,
    b: f64,
    c: f64,
    stretch: Bump,
    squeeze: Bump,
    alpha: SolvedCoefficient,
    beta: SolvedCoefficient,
    segments: Vec<Segment>,
}

fn eta(stretch: Bump, squeeze: Bump, alpha: f64, beta: f64, t: f64) -> f64 {
    (alpha * stretch.value(t) + beta * squeeze.value(t)).exp()
}

impl Kappa {
    pub fn new(zeta: f64, b: f64, c: f64) -> Result<Self, MapError> {
        let e = CHI_MARGIN;
        if !(b - c > 2.0 * e) {
            return Err(MapError::InvalidChi(format!("b - c = {} leaves no plateau for margin {e}", b - c)));
        }
        let stretch = Bump::known(-b + e, -c - e, -b, -c);
        let squeeze = Bump::known(c + e, zeta + b - e, c, zeta + b);
        let family = |bump: Bump| {
            move |k: f64| {
                let bp = bump.breakpoints();
                let spec = bump.spec();
                SmoothFn1D::new(
                    move |t| (k * bump.value(t)).exp(),
                    move |t| k * bump.derivative(t) * (k * bump.value(t)).exp(),
                    (spec.c, spec.d),
                    vec![((spec.a, spec.b), k.exp())],
                    bp,
                )
            }
        };
        let alpha = solve_monotone_coefficient(family(stretch), zeta + b - c, (-b, -c), None)?;
        let beta = solve_monotone_coefficient(family(squeeze), b - c, (c, zeta + b), None)?;
        let mut k = Self { zeta, b, c, stretch, squeeze, alpha, beta, segments: Vec::new() };
        k.segments = k.build_segments()?;
        Ok(k)
    }

    fn eta_at(&self, t: f64) -> f64 {
        eta(self.stretch, self.squeeze, self.alpha.value, self.beta.value, t)
    }

    fn build_segments(&self) -> Result<Vec<Segment>, MapError> {
        let (b, c, z, e) = (self.b, self.c, self.zeta, CHI_MARGIN);
        let seg_integral = |lo: f64, hi: f64| integrate(&|t| self.eta_at(t), lo, hi, 1e-16, 1e-14);
        let mut out = Vec::new();
        // left side anchored at kappa(-b) = -b
        let mut acc = -b;
        for (lo, hi, flat) in [(-b, -b + e, None), (-b + e, -c - e, Some(self.alpha.value.exp())), (-c - e, -c, None)] {
            let base = acc;
            acc += match flat {
                Some(v) => v * (hi - lo),
                None => seg_integral(lo, hi)?,
            };
            out.push(Segment { start: lo, end: hi, base, top: acc, flat });
        }
        // right side anchored at kappa(zeta + b) = zeta + b
        let mut right = Vec::new();
        let mut acc = z + b;
        for (lo, hi, flat) in [(z + b - e, z + b, None), (c + e, z + b - e, Some(self.beta.value.exp())), (c, c + e, None)] {
            let top = acc;
            acc -= match flat {
                Some(v) => v * (hi - lo),
                None => seg_integral(lo, hi)?,
            };
            right.push(Segment { start: lo, end: hi, base: acc, top, flat });
        }
        right.reverse();
        out.extend(right);
        Ok(out)
    }

    pub fn alpha(&self) -> SolvedCoefficient {
        self.alpha
    }

    pub fn beta(&self) -> SolvedCoefficient {
        self.beta
    }

    /// Gaps where the left- and right-anchored pieces meet the exact
    /// translation on `[-c, c]`.
    pub fn seam_mismatch(&self) -> (f64, f64) {
        let left = self.segments[2].top - (-self.c + self.zeta);
        let right = self.segments[3].base - (self.c + self.zeta);
        (left, right)
    }

    pub fn value(&self, s: f64) -> f64 {
        let (b, c, z) = (self.b, self.c, self.zeta);
        if s <= -b || s >= z + b {
            return s;
        }
        if (-c..=c).contains(&s) {
            return s + z;
        }
        let seg = self.segments.iter().find(|g| g.start <= s && s <= g.end).expect("segments cover the profile");
        match seg.flat {
            Some(v) if s - seg.start <= seg.end - s => seg.base + v * (s - seg.start),
            Some(v) => seg.top - v * (seg.end - s),
            None => {
                let f = |t: f64| self.eta_at(t);
                if s - seg.start <= seg.end - s {
                    seg.base + integrate(&f, seg.start, s, 1e-16, 1e-14).unwrap_or(f64::NAN)
                } else {
                    seg.top - integrate(&f, s, seg.end, 1e-16, 1e-14).unwrap_or(f64::NAN)
                }
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        if s <= -self.b || s >= self.zeta + self.b {
            1.0
        } else {
            self.eta_at(s)
        }
    }

    /// Interval off which the profile is the identity.
    pub fn span(&self) -> (f64, f64) {
        (-self.b, self.zeta + self.b)
    }
}

/// `chi(Y, Z, a, b, c)`: translates `B(Y, c)` onto `B(Z, c)`; identity off the
/// tube of radius `b` around the segment `YZ`.
#[derive(Debug, Clone)]
pub struct ChiMap {
    y: Vec4,
    z: Vec4,
    radii: (f64, f64, f64),
    frame: LegFrame,
    kappa: Kappa,
    rho: Bump,
}

impl ChiMap {
    pub fn new(y: Vec4, z: Vec4, a: f64, b: f64, c: f64) -> Result<Self, MapError> {
        if !(a > b && b > c && c > 0.0) {
            return Err(MapError::InvalidChi(format!("radii must satisfy a > b > c > 0, got ({a}, {b}, {c})")));
        }
        let moving: Vec<usize> = (0..4).filter(|&i| y[i] != z[i]).collect();
        if moving.len() != 1 {
            return Err(MapError::InvalidChi(format!("leg {y:?} -> {z:?} is not axis-aligned")));
        }
        let axis = moving[0];
        let zeta = (z[axis] - y[axis]).abs();
        if zeta <= 2.0 * a {
            return Err(MapError::InvalidChi(format!("leg length {zeta} must exceed 2a = {}", 2.0 * a)));
        }
        let frame = LegFrame { axis, forward: z[axis] > y[axis] };
        Ok(Self { y, z, radii: (a, b, c), frame, kappa: Kappa::new(zeta, b, c)?, rho: Bump::known(-c, c, -b, b) })
    }

    pub fn endpoints(&self) -> (Vec4, Vec4) {
        (self.y, self.z)
    }

    pub fn radii(&self) -> (f64, f64, f64) {
        self.radii
    }

    pub fn frame(&self) -> LegFrame {
        self.frame
    }

    pub fn kappa(&self) -> &Kappa {
        &self.kappa
    }

    pub fn translation(&self) -> Vec4 {
        [0, 1, 2, 3].map(|i| self.z[i] - self.y[i])
    }

    fn transverse_blend(&self, x: Vec4) -> f64 {
        (0..4).filter(|&j| j != self.frame.axis).map(|j| self.rho.value(x[j] - self.y[j])).product()
    }

    fn leg_coordinate(&self, x: Vec4) -> f64 {
        self.frame.sign() * (x[self.frame.axis] - self.y[self.frame.axis])
    }
}

impl DiffeoMap4 for ChiMap {
    fn eval(&self, x: Vec4) -> Vec4 {
        let r = self.transverse_blend(x);
        if r == 0.0 {
            return x;
        }
        let s = self.leg_coordinate(x);
        let moved = if r == 1.0 { self.kappa.value(s) } else { s + r * (self.kappa.value(s) - s) };
        let mut out = x;
        let k = self.frame.axis;
        out[k] = self.y[k] + self.frame.sign() * moved;
        out
    }

    fn jacobian(&self, x: Vec4) -> Mat4 {
        let mut j = Mat4::identity();
        let r = self.transverse_blend(x);
        if r == 0.0 {
            return j;
        }
        let k = self.frame.axis;
        let s = self.leg_coordinate(x);
        j.0[k][k] = 1.0 + r * (self.kappa.derivative(s) - 1.0);
        let gap = self.kappa.value(s) - s;
        if gap != 0.0 && r != 1.0 {
            for m in (0..4).filter(|&m| m != k) {
                let dr: f64 = (0..4)
                    .filter(|&i| i != k)
                    .map(|i| {
                        let t = x[i] - self.y[i];
                        if i == m {
                            self.rho.derivative(t)
                        } else {
                            self.rho.value(t)
                        }
                    })
                    .product();
                j.0[k][m] = self.frame.sign() * gap * dr;
            }
        }
        j
    }

    fn inverse(&self, y: Vec4) -> Result<Vec4, MapError> {
        let r = self.transverse_blend(y);
        let target = self.leg_coordinate(y);
        let (lo, hi) = self.kappa.span();
        if r == 0.0 || target <= lo || target >= hi {
            return Ok(y);
        }
        let s = bracketed_newton(
            |s| s + r * (self.kappa.value(s) - s),
            |s| 1.0 + r * (self.kappa.derivative(s) - 1.0),
            target,
            lo,
            hi,
            1e-13 * target.abs().max(1.0),
        )
        .map_err(|e| MapError::Inverse { map: self.tag(), y, reason: e.to_string() })?;
        let mut x = y;
        let k = self.frame.axis;
        x[k] = self.y[k] + self.frame.sign() * s;
        Ok(x)
    }

    fn support(&self) -> Support {
        let b = self.radii.1;
        let mut bx = self.y.map(|c| [c - b, c + b]);
        let k = self.frame.axis;
        bx[k] = [self.y[k].min(self.z[k]) - b, self.y[k].max(self.z[k]) + b];
        Support { boxes: vec![bx] }
    }

    fn tag(&self) -> String {
        format!("chi({:?} -> {:?})", self.y, self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_edges_and_translation() {
        let k = Kappa::new(10.0, 0.9, 0.8).unwrap();
        assert_eq!(k.value(-0.9), -0.9);
        assert_eq!(k.value(0.3), 10.3);
        assert!((k.value(10.9 - 1e-12) - 10.9).abs() < 1e-9);
        let (l, r) = k.seam_mismatch();
        assert!(l.abs() < 1e-9 && r.abs() < 1e-9, "{l} {r}");
        // eta integrals by composite Simpson
        let n = 200_000;
        let simpson = |a: f64, b: f64| {
            let h = (b - a) / n as f64;
            let mut s = k.derivative(a) + k.derivative(b);
            for i in 1..n {
                s += k.derivative(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        assert!((simpson(-0.9, -0.8) - 10.1).abs() < 1e-7);
        assert!((simpson(0.8, 10.9) - 0.1).abs() < 1e-7);
    }

    #[test]
    fn kappa_is_increasing() {
        let k = Kappa::new(10.0, 0.6, 0.5).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=4000 {
            let s = -0.7 + 11.4 * i as f64 / 4000.0;
            let v = k.value(s);
            assert!(v > prev, "s={s}");
            prev = v;
        }
    }

    #[test]
    fn chi_translates_the_inner_box() {
        let chi = ChiMap::new([0.0, 10.0, 5.0, 0.0], [10.0, 10.0, 5.0, 0.0], 1.0, 0.9, 0.8).unwrap();
        assert_eq!(chi.eval([0.0, 10.0, 5.0, 0.0]), [10.0, 10.0, 5.0, 0.0]);
        assert_eq!(chi.eval([0.5, 10.7, 4.3, -0.1]), [10.5, 10.7, 4.3, -0.1]);
        assert_eq!(chi.eval([5.0, 11.0, 5.0, 0.0]), [5.0, 11.0, 5.0, 0.0]);
        let x = [3.0, 10.85, 5.1, 0.2];
        let back = chi.inverse(chi.eval(x)).unwrap();
        assert!(super::super::sup_dist(back, x) < 1e-12);
    }

    #[test]
    fn rejects_diagonal_and_short_legs() {
        assert!(ChiMap::new([0.0; 4], [1.0, 1.0, 0.0, 0.0], 0.3, 0.2, 0.1).is_err());
        assert!(ChiMap::new([0.0; 4], [1.5, 0.0, 0.0, 0.0], 1.0, 0.9, 0.8).is_err());
    }
}
