//! Rotation blend around `P` (in the `(y, z)` plane) and around `Q` (in the
//! `(x, y)` and `(z, w)` planes simultaneously).
//!
//! The angle fields depend on the rotated coordinates only through their
//! radii, so each rotation preserves its own angle: the Jacobian determinant
//! is identically 1 and the inverse is the rotation by `-omega(Y)`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{DiffeoMap4, MapError, Support};
use crate::extalg4::{Mat4, Vec4};
use crate::smooth1d::Bump;

/// Plateau and cut-off radii of the angle bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaRadii {
    pub inner: f64,
    pub outer: f64,
}

impl Default for ThetaRadii {
    fn default() -> Self {
        Self { inner: 1.0 / 300.0, outer: 1.0 / 200.0 }
    }
}

impl ThetaRadii {
    /// Half-width of the cube on which the rotation is exactly a quarter turn.
    pub fn small_box(&self) -> f64 {
        self.inner / std::f64::consts::SQRT_2
    }

    /// Half-width of the cube containing each support component.
    pub fn large_box(&self) -> f64 {
        self.outer
    }
}

#[derive(Debug, Clone)]
pub struct ThetaMap {
    p: Vec4,
    q: Vec4,
    radii: ThetaRadii,
    rho: Bump,
}

/// `(cos a, sin a)` with exact values at the two angles the blend plateaus on.
fn cos_sin(a: f64) -> (f64, f64) {
    if a == 0.0 {
        (1.0, 0.0)
    } else if a == FRAC_PI_2 {
        (0.0, 1.0)
    } else if a == -FRAC_PI_2 {
        (0.0, -1.0)
    } else {
        (a.cos(), a.sin())
    }
}

fn rotate(c: f64, s: f64, u: f64, v: f64) -> (f64, f64) {
    (c * u - s * v, s * u + c * v)
}

impl ThetaMap {
    pub fn new(p: Vec4, q: Vec4, radii: ThetaRadii) -> Self {
        let rho = Bump::known(-radii.inner, radii.inner, -radii.outer, radii.outer);
        Self { p, q, radii, rho }
    }

    pub fn radii(&self) -> ThetaRadii {
        self.radii
    }

    pub fn centers(&self) -> (Vec4, Vec4) {
        (self.p, self.q)
    }

    fn near(&self, x: Vec4, c: Vec4) -> bool {
        (0..4).all(|i| (x[i] - c[i]).abs() < self.radii.outer)
    }

    /// Angle field around `P` and its gradient.
    fn omega_p(&self, d: Vec4) -> (f64, Vec4) {
        let r = d[1].hypot(d[2]);
        let (fx, fw, fr) = (self.rho.value(d[0]), self.rho.value(d[3]), self.rho.value(r));
        let (gx, gw, gr) = (self.rho.derivative(d[0]), self.rho.derivative(d[3]), self.rho.derivative(r));
        let radial = if r > 0.0 { FRAC_PI_2 * fx * fw * gr / r } else { 0.0 };
        let grad = [FRAC_PI_2 * gx * fw * fr, radial * d[1], radial * d[2], FRAC_PI_2 * fx * gw * fr];
        (FRAC_PI_2 * fx * fw * fr, grad)
    }

    /// Angle field around `Q` and its gradient.
    fn omega_q(&self, d: Vec4) -> (f64, Vec4) {
        let ru = d[0].hypot(d[1]);
        let rv = d[2].hypot(d[3]);
        let (fu, fv) = (self.rho.value(ru), self.rho.value(rv));
        let (gu, gv) = (self.rho.derivative(ru), self.rho.derivative(rv));
        let a = if ru > 0.0 { FRAC_PI_2 * gu * fv / ru } else { 0.0 };
        let b = if rv > 0.0 { FRAC_PI_2 * fu * gv / rv } else { 0.0 };
        (FRAC_PI_2 * fu * fv, [a * d[0], a * d[1], b * d[2], b * d[3]])
    }

    /// Angle at `x`, zero away from both centers.
    pub fn angle(&self, x: Vec4) -> f64 {
        if self.near(x, self.p) {
            self.omega_p(sub(x, self.p)).0
        } else if self.near(x, self.q) {
            self.omega_q(sub(x, self.q)).0
        } else {
            0.0
        }
    }

    fn rotate_by(&self, x: Vec4, sign: f64) -> Vec4 {
        if self.near(x, self.p) {
            let d = sub(x, self.p);
            let (c, s) = cos_sin(sign * self.omega_p(d).0);
            let (y, z) = rotate(c, s, d[1], d[2]);
            add([d[0], y, z, d[3]], self.p)
        } else if self.near(x, self.q) {
            let d = sub(x, self.q);
            let (c, s) = cos_sin(sign * self.omega_q(d).0);
            let (a, b) = rotate(c, s, d[0], d[1]);
            let (e, f) = rotate(c, s, d[2], d[3]);
            add([a, b, e, f], self.q)
        } else {
            x
        }
    }
}

fn sub(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn add(a: Vec4, b: Vec4) -> Vec4 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

/// Rows `(i, j)` of the Jacobian of `(u, v) -> R[omega](u, v)` embedded in R^4.
fn rotation_rows(jac: &mut Mat4, (i, j): (usize, usize), u: f64, v: f64, omega: f64, grad: Vec4) {
    let (c, s) = cos_sin(omega);
    // derivative of the rotated pair in omega
    let (du, dv) = (-s * u - c * v, c * u - s * v);
    for k in 0..4 {
        jac.0[i][k] = du * grad[k];
        jac.0[j][k] = dv * grad[k];
    }
    jac.0[i][i] += c;
    jac.0[i][j] -= s;
    jac.0[j][i] += s;
    jac.0[j][j] += c;
}

impl DiffeoMap4 for ThetaMap {
    fn eval(&self, x: Vec4) -> Vec4 {
        self.rotate_by(x, 1.0)
    }

    fn jacobian(&self, x: Vec4) -> Mat4 {
        let mut j = Mat4::identity();
        if self.near(x, self.p) {
            let d = sub(x, self.p);
            let (om, grad) = self.omega_p(d);
            rotation_rows(&mut j, (1, 2), d[1], d[2], om, grad);
        } else if self.near(x, self.q) {
            let d = sub(x, self.q);
            let (om, grad) = self.omega_q(d);
            rotation_rows(&mut j, (0, 1), d[0], d[1], om, grad);
            rotation_rows(&mut j, (2, 3), d[2], d[3], om, grad);
        }
        j
    }

    fn inverse(&self, y: Vec4) -> Result<Vec4, MapError> {
        Ok(self.rotate_by(y, -1.0))
    }

    fn support(&self) -> Support {
        Support::cube(self.p, self.radii.outer).union(&Support::cube(self.q, self.radii.outer))
    }

    fn tag(&self) -> String {
        "theta".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extalg4::conorm;
    use crate::extalg4::wedge3;
    use crate::maps4d::finite_difference_jacobian;

    fn theta() -> ThetaMap {
        ThetaMap::new([0.0; 4], [0.0, 10.0, 0.0, 0.0], ThetaRadii::default())
    }

    #[test]
    fn quarter_turn_on_small_boxes() {
        let t = theta();
        let s = t.radii().small_box();
        let x = [0.3 * s, -0.9 * s, 0.99 * s, -s];
        assert_eq!(t.eval(x), [x[0], -x[2], x[1], x[3]]);
        let y = [0.5 * s, 10.0 - 0.7 * s, 0.2 * s, 0.9 * s];
        let (a, b, z, w) = (y[0], y[1] - 10.0, y[2], y[3]);
        let got = t.eval(y);
        let want = [-b, a + 10.0, -w, z];
        for i in 0..4 {
            assert!((got[i] - want[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn determinant_is_one_and_jacobian_matches_fd() {
        let t = theta();
        let o = t.radii().outer;
        for &x in &[[0.001, 0.002, -0.003, 0.001], [0.002, 10.003, 0.001, -0.002], [0.0, 0.004, 0.0, 0.0]] {
            let j = t.jacobian(x);
            assert!((j.det() - 1.0).abs() < 1e-12, "det {}", j.det());
            let fd = finite_difference_jacobian(&t, x, 1e-7);
            assert!(j.max_abs_diff(&fd) < 1e-5 * j.frobenius());
        }
        assert_eq!(t.eval([0.0, 0.0, o, 0.0]), [0.0, 0.0, o, 0.0]);
        assert!(conorm(&wedge3(&t.jacobian([0.0, 0.0041, 0.0, 0.0]))) > 0.0);
    }

    #[test]
    fn inverse_is_exact_rotation_back() {
        let t = theta();
        for &x in &[[0.001, 0.002, -0.003, 0.001], [0.002, 10.003, 0.001, -0.002], [3.0, 1.0, 0.0, 0.0]] {
            let y = t.eval(x);
            let back = t.inverse(y).unwrap();
            for i in 0..4 {
                assert!((back[i] - x[i]).abs() < 1e-15);
            }
        }
    }
}
