//! Time-1 maps of the compactly supported fields
//! `f(x) = -ln(10) x rho(x)` and `g(y) = -(ln(10)/100)(y^3 - 100 y) rho(y)`.
//!
//! Inside the core `|x| <= lambda^3 - 2` both fields are polynomial and the
//! core is invariant, so the flow has a closed form there. In the cutoff
//! shell the 1D flow is recovered from the time-of-flight integral
//! `T(u) = int du / |field|`.

use std::f64::consts::LN_10;

use super::quadrature::integrate;
use super::{bracketed_newton, Bump, MapDescriptor, ScalarMap1D, SmoothError, LAMBDA_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoreField {
    /// `-ln(10) x`: every orbit contracts to 0 by a factor 10 per unit time.
    Contracting,
    /// `-(ln(10)/100)(y^3 - 100 y)`: 0 repelling, +-10 attracting.
    Bistable,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowField1D {
    core: CoreField,
    cutoff: Bump,
    core_radius: f64,
    edge: f64,
}

impl FlowField1D {
    pub fn new(core: CoreField, lambda: f64) -> Self {
        let l3 = lambda.powi(3);
        let core_radius = l3 - 2.0;
        let edge = l3 - 1.0;
        Self {
            core,
            cutoff: Bump::known(-core_radius, core_radius, -edge, edge),
            core_radius,
            edge,
        }
    }

    pub fn kind(&self) -> CoreField {
        self.core
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    /// Field vanishes for `|x| >= edge`.
    pub fn support(&self) -> (f64, f64) {
        (-self.edge, self.edge)
    }

    fn polynomial(&self, x: f64) -> f64 {
        match self.core {
            CoreField::Contracting => -LN_10 * x,
            CoreField::Bistable => LN_10 / 100.0 * x * (100.0 - x * x),
        }
    }

    fn polynomial_prime(&self, x: f64) -> f64 {
        match self.core {
            CoreField::Contracting => -LN_10,
            CoreField::Bistable => LN_10 / 100.0 * (100.0 - 3.0 * x * x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.polynomial(x) * self.cutoff.value(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.polynomial_prime(x) * self.cutoff.value(x) + self.polynomial(x) * self.cutoff.derivative(x)
    }

    /// Upper bound for `|field'|`: `max|p'| + max|p| * max|rho'|` over the support.
    pub fn lipschitz_bound(&self) -> f64 {
        let e = self.edge;
        let (dp, p) = match self.core {
            CoreField::Contracting => (LN_10, LN_10 * e),
            CoreField::Bistable => (LN_10 / 100.0 * (3.0 * e * e), LN_10 / 100.0 * e * (e * e)),
        };
        // the cutoff transition has width 1 and the smooth step slope peaks at 2
        dp + 2.0 * p
    }

    /// Closed-form core flow for time `tau` (either sign), valid while the
    /// orbit stays in the core.
    pub fn core_flow(&self, x: f64, tau: f64) -> f64 {
        match self.core {
            CoreField::Contracting => {
                if tau == 1.0 {
                    x / 10.0
                } else if tau == -1.0 {
                    x * 10.0
                } else {
                    x * 10f64.powf(-tau)
                }
            }
            CoreField::Bistable => {
                let q = 100f64.powf(-tau);
                let y2 = x * x;
                10.0 * x / (y2 + (100.0 - y2) * q).sqrt()
            }
        }
    }

    pub fn core_flow_derivative(&self, x: f64, tau: f64) -> f64 {
        match self.core {
            CoreField::Contracting => 10f64.powf(-tau),
            CoreField::Bistable => {
                let q = 100f64.powf(-tau);
                let y2 = x * x;
                let d = y2 + (100.0 - y2) * q;
                1000.0 * q / (d * d.sqrt())
            }
        }
    }
}

/// Time-1 map of a [`FlowField1D`].
#[derive(Debug, Clone)]
pub struct FlowMap1D {
    field: FlowField1D,
    lambda: f64,
    /// image of the core boundary under the time-1 map
    core_image: f64,
}

fn check_lambda(lambda: f64) -> Result<(), SmoothError> {
    if lambda.is_nan() || lambda < LAMBDA_MIN {
        return Err(SmoothError::LambdaTooSmall(lambda));
    }
    Ok(())
}

/// `F`: time-1 map of `f(x) = -ln(10) x rho(x)`.
pub fn build_f(lambda: f64) -> Result<FlowMap1D, SmoothError> {
    check_lambda(lambda)?;
    FlowMap1D::new(FlowField1D::new(CoreField::Contracting, lambda), lambda)
}

/// `G`: time-1 map of `g(y) = -(ln(10)/100)(y^3 - 100y) rho(y)`.
pub fn build_g(lambda: f64) -> Result<FlowMap1D, SmoothError> {
    check_lambda(lambda)?;
    FlowMap1D::new(FlowField1D::new(CoreField::Bistable, lambda), lambda)
}

impl FlowMap1D {
    fn new(field: FlowField1D, lambda: f64) -> Result<Self, SmoothError> {
        let core_image = field.core_flow(field.core_radius, 1.0);
        let map = Self { field, lambda, core_image };
        // probe the cutoff shell once so integrator trouble shows up at construction
        let (rc, e) = (field.core_radius, field.edge);
        for k in 1..16 {
            let x = rc + (e - rc) * k as f64 / 16.0;
            let y = map.shell_flow(x)?;
            if !(y.is_finite() && y >= 0.0 && y <= x) {
                return Err(SmoothError::FlowIntegration { x, reason: format!("image {y} outside [0, x]") });
            }
        }
        Ok(map)
    }

    pub fn field(&self) -> &FlowField1D {
        &self.field
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn rate(&self, u: f64) -> f64 {
        1.0 / self.field.value(u).abs()
    }

    fn flight_time(&self, from: f64, to: f64) -> Result<f64, SmoothError> {
        integrate(&|u| self.rate(u), from, to, 1e-15, 1e-12)
    }

    /// Time-1 image of `s` in the cutoff shell `(core_radius, edge)`, `s > 0`.
    /// The field points into the core throughout the shell.
    fn shell_flow(&self, s: f64) -> Result<f64, SmoothError> {
        let rc = self.field.core_radius;
        if self.field.value(s) == 0.0 {
            return Ok(s);
        }
        let to_core = self.flight_time(rc, s)?;
        if to_core <= 1.0 {
            return Ok(self.field.core_flow(rc, 1.0 - to_core));
        }
        // still in the shell at time 1: solve int_u^s rate = 1
        let remaining = |u: f64| -self.flight_time(u, s).unwrap_or(f64::INFINITY);
        bracketed_newton(remaining, |u| self.rate(u), -1.0, rc, s, 1e-13)
    }

    /// Fallible evaluation; errors carry the offending point.
    pub fn try_value(&self, x: f64) -> Result<f64, SmoothError> {
        let s = x.abs();
        if s >= self.field.edge {
            return Ok(x);
        }
        if s <= self.field.core_radius {
            return Ok(self.field.core_flow(x, 1.0));
        }
        let y = self.shell_flow(s).map_err(|e| SmoothError::FlowIntegration { x, reason: e.to_string() })?;
        Ok(y.copysign(x))
    }
}

impl ScalarMap1D for FlowMap1D {
    fn value(&self, x: f64) -> f64 {
        // construction probed the shell; a late quadrature failure keeps the point fixed
        self.try_value(x).unwrap_or(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        let s = x.abs();
        if s >= self.field.edge {
            return 1.0;
        }
        if s <= self.field.core_radius {
            return self.field.core_flow_derivative(x, 1.0);
        }
        let fx = self.field.value(x);
        if fx == 0.0 {
            return 1.0;
        }
        self.field.value(self.value(x)) / fx
    }

    fn inverse(&self, y: f64) -> Result<f64, SmoothError> {
        let s = y.abs();
        if s >= self.field.edge {
            return Ok(y);
        }
        if s <= self.core_image {
            return Ok(self.field.core_flow(y, -1.0));
        }
        let tol = 1e-10 * s.max(1.0);
        let x = bracketed_newton(
            |x| self.value(x),
            |x| self.derivative(x),
            s,
            self.field.core_radius,
            self.field.edge,
            tol,
        )?;
        Ok(x.copysign(y))
    }

    fn support(&self) -> (f64, f64) {
        self.field.support()
    }

    fn descriptor(&self) -> MapDescriptor {
        let field = match self.field.core {
            CoreField::Contracting => "-ln(10) x rho(x)",
            CoreField::Bistable => "-(ln(10)/100)(y^3 - 100 y) rho(y)",
        };
        MapDescriptor::Flow { field: field.to_string(), lipschitz_bound: self.field.lipschitz_bound() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Classic RK4 on x' = field(x) over unit time; independent of the closed forms.
    fn rk4(field: &FlowField1D, x0: f64, steps: usize) -> f64 {
        let h = 1.0 / steps as f64;
        let mut x = x0;
        for _ in 0..steps {
            let k1 = field.value(x);
            let k2 = field.value(x + 0.5 * h * k1);
            let k3 = field.value(x + 0.5 * h * k2);
            let k4 = field.value(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x
    }

    #[test]
    fn f_core_matches_rk4() {
        let f = build_f(100.0).unwrap();
        assert_eq!(f.value(1.0), 0.1);
        let oracle = rk4(f.field(), 1.0, 2000);
        assert!((oracle - 0.1).abs() < 1e-9, "rk4 {oracle}");
        for x in [-7.5, 3.0, 250.0, 9999.0] {
            let o = rk4(f.field(), x, 2000);
            assert!((f.value(x) - o).abs() <= 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn g_core_matches_rk4() {
        let g = build_g(100.0).unwrap();
        for y in [-12.0, -3.0, 0.5, 5.0, 10.0, 20.0] {
            let o = rk4(g.field(), y, 20_000);
            assert!((g.value(y) - o).abs() < 1e-9, "y={y} closed={} rk4={o}", g.value(y));
        }
    }

    #[test]
    fn g_fixed_point_derivatives() {
        let g = build_g(100.0).unwrap();
        assert!((g.derivative(0.0) - 10.0).abs() < 1e-12);
        assert!((g.derivative(10.0) - 0.01).abs() < 1e-14);
        assert_eq!(g.value(10.0), 10.0);
        assert_eq!(g.inverse(10.0).unwrap(), 10.0);
    }

    /// RK4 with the step tied to the local stiffness `|field'|`.
    fn rk4_local_step(field: &FlowField1D, x0: f64) -> f64 {
        let (mut t, mut x) = (0.0, x0);
        while t < 1.0 {
            let h = (0.02 / field.derivative(x).abs().max(1.0)).min(1.0 - t);
            let k1 = field.value(x);
            let k2 = field.value(x + 0.5 * h * k1);
            let k3 = field.value(x + 0.5 * h * k2);
            let k4 = field.value(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
        }
        x
    }

    #[test]
    fn shell_flow_matches_local_step_rk4() {
        let f = build_f(100.0).unwrap();
        for x in [1e6 - 1.9, 1e6 - 1.5, 1e6 - 1.1] {
            let o = rk4_local_step(f.field(), x);
            let v = f.value(x);
            assert!((v - o).abs() / o.abs() < 1e-6, "x={x} shell {v} vs rk4 {o}");
        }
    }

    #[test]
    fn shell_points_near_edge_barely_move() {
        let f = build_f(100.0).unwrap();
        let x = 1e6 - 1.0 - 0.01;
        let y = f.value(x);
        assert!(y <= x && x - y < 1e-3);
        let back = f.inverse(y).unwrap();
        assert!((f.value(back) - y).abs() <= 1e-10 * y);
    }

    #[test]
    fn identity_outside_support() {
        let f = build_f(100.0).unwrap();
        assert_eq!(f.value(2e6), 2e6);
        assert_eq!(f.value(-1e6 + 1.0), -1e6 + 1.0);
        let g = build_g(100.0).unwrap();
        assert_eq!(g.value(-3e6), -3e6);
    }

    #[test]
    fn inverse_roundtrip() {
        let f = build_f(100.0).unwrap();
        assert!((f.inverse(0.1).unwrap() - 1.0).abs() < 1e-9);
        let g = build_g(100.0).unwrap();
        for y in [-10.04, -5.0, 0.0, 1e-3, 9.99, 10.03] {
            let x = g.inverse(y).unwrap();
            assert!((g.value(x) - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn rejects_small_lambda() {
        assert_eq!(build_f(20.0).unwrap_err(), SmoothError::LambdaTooSmall(20.0));
    }

    #[test]
    fn lipschitz_bound_dominates_scan() {
        for field in [FlowField1D::new(CoreField::Contracting, 100.0), FlowField1D::new(CoreField::Bistable, 100.0)] {
            let bound = field.lipschitz_bound();
            let (lo, hi) = (field.core_radius - 10.0, field.edge + 1.0);
            for k in 0..=2000 {
                let x = lo + (hi - lo) * k as f64 / 2000.0;
                assert!(field.derivative(x).abs() <= bound);
            }
        }
    }
}
