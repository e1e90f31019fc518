//! `Psi_i(X) = x_i + R_i(X) (F_i(x_i) - x_i)` with `F_1 = F`, `F_2 = G`,
//! `F_3 = F_4 = H` and `R_i` the product of the cube bump over the other
//! three coordinates.

use std::sync::Arc;

use super::{DiffeoMap4, MapError, Support};
use crate::extalg4::{Mat4, Vec4};
use crate::smooth1d::{bracketed_newton, Bump, ScalarMap1D};

#[derive(Debug, Clone)]
pub struct PsiMap {
    components: [Arc<dyn ScalarMap1D>; 4],
    rho: Bump,
    core: f64,
}

impl PsiMap {
    /// `core = lambda^3`; the blend bump is `rho[-core, core, -core-1, core+1]`.
    pub fn new(f: Arc<dyn ScalarMap1D>, g: Arc<dyn ScalarMap1D>, h: Arc<dyn ScalarMap1D>, core: f64) -> Self {
        Self { components: [f, g, h.clone(), h], rho: Bump::known(-core, core, -core - 1.0, core + 1.0), core }
    }

    pub fn component(&self, i: usize) -> &Arc<dyn ScalarMap1D> {
        &self.components[i]
    }

    fn blend(&self, x: Vec4, i: usize) -> f64 {
        (0..4).filter(|&j| j != i).map(|j| self.rho.value(x[j])).product()
    }

    fn blend_gradient(&self, x: Vec4, i: usize) -> Vec4 {
        let mut g = [0.0; 4];
        for (k, gk) in g.iter_mut().enumerate() {
            if k == i {
                continue;
            }
            *gk = (0..4)
                .filter(|&j| j != i)
                .map(|j| if j == k { self.rho.derivative(x[j]) } else { self.rho.value(x[j]) })
                .product();
        }
        g
    }

    /// The pure product `(F(x), G(y), H(z), H(w))`.
    pub fn product(&self, x: Vec4) -> Vec4 {
        [0, 1, 2, 3].map(|i| self.components[i].value(x[i]))
    }
}

impl DiffeoMap4 for PsiMap {
    fn eval(&self, x: Vec4) -> Vec4 {
        let mut out = x;
        for i in 0..4 {
            let r = self.blend(x, i);
            if r == 1.0 {
                out[i] = self.components[i].value(x[i]);
            } else if r != 0.0 {
                out[i] = x[i] + r * (self.components[i].value(x[i]) - x[i]);
            }
        }
        out
    }

    fn jacobian(&self, x: Vec4) -> Mat4 {
        let mut j = Mat4::identity();
        for i in 0..4 {
            let r = self.blend(x, i);
            if r == 0.0 {
                continue;
            }
            let fi = &self.components[i];
            j.0[i][i] = 1.0 + r * (fi.derivative(x[i]) - 1.0);
            if r != 1.0 {
                let gap = fi.value(x[i]) - x[i];
                if gap != 0.0 {
                    let g = self.blend_gradient(x, i);
                    for k in (0..4).filter(|&k| k != i) {
                        j.0[i][k] = gap * g[k];
                    }
                }
            }
        }
        j
    }

    /// Coordinates outside `[-core, core]` are fixed, which determines every
    /// blend factor; each remaining coordinate is a monotone 1D solve.
    fn inverse(&self, y: Vec4) -> Result<Vec4, MapError> {
        let mut x = y;
        for i in 0..4 {
            if y[i].abs() > self.core {
                continue;
            }
            let r = self.blend(y, i);
            let fi = &self.components[i];
            x[i] = if r == 0.0 {
                y[i]
            } else if r == 1.0 {
                fi.inverse(y[i])?
            } else {
                let tol = 1e-12 * y[i].abs().max(1.0);
                bracketed_newton(
                    |t| t + r * (fi.value(t) - t),
                    |t| 1.0 + r * (fi.derivative(t) - 1.0),
                    y[i],
                    -self.core,
                    self.core,
                    tol,
                )
                .map_err(|e| MapError::Inverse { map: "psi".into(), y, reason: e.to_string() })?
            };
        }
        Ok(x)
    }

    fn support(&self) -> Support {
        Support::cube([0.0; 4], self.core + 1.0)
    }

    fn tag(&self) -> String {
        "psi".into()
    }
}
