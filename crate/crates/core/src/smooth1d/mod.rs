//! Scalar ingredients: plateau bumps, time-1 maps of 1D vector fields,
//! and maps defined as antiderivatives of a positive density.

mod antiderivative;
mod bump;
mod coefficient;
mod flow;
pub mod quadrature;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use antiderivative::{build_h, AntiderivativeMap, HDensity};
pub use bump::{build_bump, smooth_step, smooth_step_prime, Bump, BumpSpec};
pub use coefficient::{solve_monotone_coefficient, SolvedCoefficient};
pub use flow::{build_f, build_g, CoreField, FlowField1D, FlowMap1D};

/// Smallest admissible `lambda` for the scalar constructions.
pub const LAMBDA_MIN: f64 = 100.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SmoothError {
    #[error("malformed bump {spec:?}: {reason}")]
    MalformedBump { spec: BumpSpec, reason: &'static str },
    #[error("lambda = {0} is below the admissible minimum {LAMBDA_MIN}")]
    LambdaTooSmall(f64),
    #[error("quadrature did not converge on [{a}, {b}] (estimate {estimate}, error {error})")]
    Quadrature { a: f64, b: f64, estimate: f64, error: f64 },
    #[error("no bracket for target {target} after {doublings} doublings")]
    BracketExpansion { target: f64, doublings: usize },
    #[error("coefficient solve stalled: residual {residual} for target {target}")]
    CoefficientResidual { target: f64, residual: f64 },
    #[error("root solve for y = {y} did not converge after {iterations} iterations")]
    InverseNonConvergence { y: f64, iterations: usize },
    #[error("flow integration failed at x = {x}: {reason}")]
    FlowIntegration { x: f64, reason: String },
}

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A smooth scalar function with exact derivative, declared support and
/// declared plateaus (intervals on which it is exactly constant).
#[derive(Clone)]
pub struct SmoothFn1D {
    value: Scalar,
    derivative: Scalar,
    support: (f64, f64),
    plateaus: Vec<((f64, f64), f64)>,
    breakpoints: Vec<f64>,
}

impl fmt::Debug for SmoothFn1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothFn1D")
            .field("support", &self.support)
            .field("plateaus", &self.plateaus)
            .field("breakpoints", &self.breakpoints)
            .finish()
    }
}

impl SmoothFn1D {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: (f64, f64),
        plateaus: Vec<((f64, f64), f64)>,
        breakpoints: Vec<f64>,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            support,
            plateaus,
            breakpoints,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.value)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.derivative)(t)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn plateaus(&self) -> &[((f64, f64), f64)] {
        &self.plateaus
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn on_plateau(&self, lo: f64, hi: f64) -> bool {
        self.plateaus.iter().any(|&((a, b), _)| a <= lo && hi <= b)
    }

    /// Integral over `[a, b]`, exact on declared plateaus.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64, SmoothError> {
        quadrature::integrate_piecewise(
            &|t| self.value(t),
            a,
            b,
            &self.breakpoints,
            |lo, hi| self.on_plateau(lo, hi),
            1e-14,
        )
    }
}

/// How a [`ScalarMap1D`] was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapDescriptor {
    Flow { field: String, lipschitz_bound: f64 },
    Antiderivative { alpha0: SolvedCoefficient, beta0: SolvedCoefficient },
}

/// Orientation-preserving diffeomorphism of the real line.
pub trait ScalarMap1D: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;
    fn derivative(&self, x: f64) -> f64;
    fn inverse(&self, y: f64) -> Result<f64, SmoothError>;
    /// Closure of `{x : map(x) != x}`.
    fn support(&self) -> (f64, f64);
    fn descriptor(&self) -> MapDescriptor;
}

/// Inverse of an increasing function on `[lo, hi]` by Newton steps kept
/// inside a shrinking bracket. Stops when `|f(x) - target| <= tol` or the
/// bracket has collapsed to adjacent floats.
pub(crate) fn bracketed_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<f64, SmoothError> {
    const MAX_ITER: usize = 200;
    let mut x = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, x);
    for _ in 0..MAX_ITER {
        let r = f(x) - target;
        if r.abs() < best.0 {
            best = (r.abs(), x);
        }
        if r.abs() <= tol {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(best.1);
        }
        let d = df(x);
        let step = if d > 0.0 && d.is_finite() { x - r / d } else { f64::NAN };
        x = if step > lo && step < hi { step } else { mid };
    }
    Err(SmoothError::InverseNonConvergence { y: target, iterations: MAX_ITER })
}
