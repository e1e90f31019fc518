//! `H(z) = int_0^z h` for a positive density `h` assembled from four bumps
//! and a constant floor; `H(-z) = -H(z)`.

use super::quadrature::integrate;
use super::{
    bracketed_newton, solve_monotone_coefficient, Bump, MapDescriptor, ScalarMap1D, SmoothError,
    SmoothFn1D, SolvedCoefficient, LAMBDA_MIN,
};

/// Density `h = rho1 + alpha rho2 + rho3 + beta rho4 + lambda^-2` on `t >= 0`.
#[derive(Debug, Clone, Copy)]
pub struct HDensity {
    lambda: f64,
    alpha: f64,
    beta: f64,
    terms: [(f64, Bump); 4],
    floor: f64,
    edge: f64,
}

impl HDensity {
    pub fn new(lambda: f64, alpha: f64, beta: f64) -> Self {
        let inv2 = lambda.powi(-2);
        let l3 = lambda.powi(3);
        let terms = [
            (lambda - inv2, Bump::known(f64::NEG_INFINITY, 1.0, f64::NEG_INFINITY, 1.0 + inv2)),
            (alpha, Bump::known(7.0 / 5.0, 8.0 / 5.0, 6.0 / 5.0, 9.0 / 5.0)),
            (1.0 - inv2, Bump::known(l3 - 1.0, f64::INFINITY, l3 - 2.0, f64::INFINITY)),
            (beta, Bump::known(l3 - 8.0 / 5.0, l3 - 7.0 / 5.0, l3 - 9.0 / 5.0, l3 - 6.0 / 5.0)),
        ];
        Self { lambda, alpha, beta, terms, floor: inv2, edge: l3 - 1.0 }
    }

    /// Value at `|t|`. Exactly `lambda` on `[0, 1]` and exactly 1 beyond `lambda^3 - 1`.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.abs();
        if t <= 1.0 {
            return self.lambda;
        }
        if t >= self.edge {
            return 1.0;
        }
        self.terms.iter().map(|(k, b)| k * b.value(t)).sum::<f64>() + self.floor
    }

    /// Derivative in `t` (for `t >= 0`).
    pub fn derivative(&self, t: f64) -> f64 {
        let s = t.abs();
        let d: f64 = self.terms.iter().map(|(k, b)| k * b.derivative(s)).sum();
        if t < 0.0 {
            -d
        } else {
            d
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.terms.iter().flat_map(|(_, b)| b.breakpoints()).filter(|t| *t > 0.0).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn is_flat_on(&self, lo: f64, hi: f64) -> bool {
        self.terms.iter().all(|(_, b)| b.is_flat_on(lo, hi))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// As a [`SmoothFn1D`] on `t >= 0`, with every flat segment declared a plateau.
    pub fn to_smooth_fn(&self) -> SmoothFn1D {
        let this = *self;
        let bps = self.breakpoints();
        let mut cuts = vec![0.0];
        cuts.extend(bps.iter().copied());
        let mut plateaus = Vec::new();
        for w in cuts.windows(2) {
            if self.is_flat_on(w[0], w[1]) {
                plateaus.push(((w[0], w[1]), self.value(0.5 * (w[0] + w[1]))));
            }
        }
        plateaus.push(((self.edge, f64::INFINITY), 1.0));
        SmoothFn1D::new(
            move |t| this.value(t),
            move |t| this.derivative(t),
            (0.0, f64::INFINITY),
            plateaus,
            bps,
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    /// `H(start)`
    base: f64,
    /// `H(end)`
    top: f64,
    /// density value if constant on the segment
    flat: Option<f64>,
}

/// `H` with cached values at every density breakpoint.
#[derive(Debug, Clone)]
pub struct AntiderivativeMap {
    lambda: f64,
    density: HDensity,
    segments: Vec<Segment>,
    edge: f64,
    alpha0: SolvedCoefficient,
    beta0: SolvedCoefficient,
}

/// Builds `H` for the given `lambda`, solving `alpha0` from `int_1^2 h = 1`
/// and `beta0` from `int_0^{lambda^3 - 1} h = lambda^3 - 1`.
pub fn build_h(lambda: f64) -> Result<AntiderivativeMap, SmoothError> {
    if lambda.is_nan() || lambda < LAMBDA_MIN {
        return Err(SmoothError::LambdaTooSmall(lambda));
    }
    let alpha0 = solve_monotone_coefficient(
        |a| HDensity::new(lambda, a, 0.0).to_smooth_fn(),
        1.0,
        (1.0, 2.0),
        Some((0.0, 1.0)),
    )?;
    let edge = lambda.powi(3) - 1.0;
    let beta0 = solve_monotone_coefficient(
        |b| HDensity::new(lambda, alpha0.value, b).to_smooth_fn(),
        edge,
        (0.0, edge),
        Some((0.0, 1.0)),
    )?;
    AntiderivativeMap::new(lambda, alpha0, beta0)
}

impl AntiderivativeMap {
    fn new(lambda: f64, alpha0: SolvedCoefficient, beta0: SolvedCoefficient) -> Result<Self, SmoothError> {
        let density = HDensity::new(lambda, alpha0.value, beta0.value);
        let edge = density.edge;
        let anchor = lambda.powi(3) - 2.0;
        let mut cuts = vec![0.0];
        cuts.extend(density.breakpoints());
        let seg_integral = |lo: f64, hi: f64| -> Result<f64, SmoothError> {
            if density.is_flat_on(lo, hi) {
                Ok(density.value(0.5 * (lo + hi)) * (hi - lo))
            } else {
                integrate(&|t| density.value(t), lo, hi, 1e-15, 1e-14)
            }
        };
        let mut segments = Vec::with_capacity(cuts.len());
        // left-anchored at H(0) = 0 up to lambda^3 - 2
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if lo >= anchor {
                break;
            }
            let flat = density.is_flat_on(lo, hi).then(|| density.value(0.5 * (lo + hi)));
            let base = acc;
            acc += seg_integral(lo, hi)?;
            segments.push(Segment { start: lo, end: hi, base, top: acc, flat });
        }
        // right-anchored at H(edge) = edge, which the beta0 solve guarantees up to its residual
        let mut right = Vec::new();
        let mut acc_r = edge;
        for w in cuts.windows(2).rev() {
            let (lo, hi) = (w[0], w[1]);
            if lo < anchor {
                break;
            }
            let top = acc_r;
            acc_r -= seg_integral(lo, hi)?;
            let flat = density.is_flat_on(lo, hi).then(|| density.value(0.5 * (lo + hi)));
            right.push(Segment { start: lo, end: hi, base: acc_r, top, flat });
        }
        right.reverse();
        segments.extend(right);
        Ok(Self { lambda, density, segments, edge, alpha0, beta0 })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn density(&self) -> &HDensity {
        &self.density
    }

    pub fn alpha0(&self) -> SolvedCoefficient {
        self.alpha0
    }

    pub fn beta0(&self) -> SolvedCoefficient {
        self.beta0
    }

    /// Jump between the left- and right-anchored values at `lambda^3 - 2`.
    pub fn anchor_mismatch(&self) -> f64 {
        let anchor = self.lambda.powi(3) - 2.0;
        let left = self
            .segments
            .iter()
            .rev()
            .find(|s| s.end <= anchor)
            .map(|s| s.top)
            .unwrap_or(0.0);
        let right = self.segments.iter().find(|s| s.start >= anchor).map(|s| s.base).unwrap_or(anchor);
        right - left
    }

    fn segment_of(&self, z: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.start <= z);
        &self.segments[idx.saturating_sub(1)]
    }

    fn positive_value(&self, z: f64) -> f64 {
        if z >= self.edge {
            return z;
        }
        let seg = self.segment_of(z);
        match seg.flat {
            Some(v) => seg.base + v * (z - seg.start),
            None => {
                let d = self.density;
                // integrate from the nearer cached endpoint
                if z - seg.start <= seg.end - z {
                    seg.base + integrate(&|t| d.value(t), seg.start, z, 1e-15, 1e-14).unwrap_or(f64::NAN)
                } else {
                    seg.top - integrate(&|t| d.value(t), z, seg.end, 1e-15, 1e-14).unwrap_or(f64::NAN)
                }
            }
        }
    }

    fn positive_inverse(&self, y: f64) -> Result<f64, SmoothError> {
        if y <= self.lambda {
            return Ok(y / self.lambda);
        }
        if y >= self.edge {
            return Ok(y);
        }
        let idx = self.segments.partition_point(|s| s.base <= y);
        let seg = self.segments[idx.saturating_sub(1)];
        match seg.flat {
            Some(v) => Ok((seg.start + (y - seg.base) / v).min(seg.end)),
            None => bracketed_newton(
                |z| self.positive_value(z),
                |z| self.density.value(z),
                y,
                seg.start,
                seg.end,
                1e-10 * y.max(1.0),
            ),
        }
    }
}

impl ScalarMap1D for AntiderivativeMap {
    fn value(&self, z: f64) -> f64 {
        if z < 0.0 {
            -self.positive_value(-z)
        } else {
            self.positive_value(z)
        }
    }

    fn derivative(&self, z: f64) -> f64 {
        self.density.value(z)
    }

    fn inverse(&self, y: f64) -> Result<f64, SmoothError> {
        if y < 0.0 {
            self.positive_inverse(-y).map(|z| -z)
        } else {
            self.positive_inverse(y)
        }
    }

    fn support(&self) -> (f64, f64) {
        (-self.edge, self.edge)
    }

    fn descriptor(&self) -> MapDescriptor {
        MapDescriptor::Antiderivative { alpha0: self.alpha0, beta0: self.beta0 }
    }
}
