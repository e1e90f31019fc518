//! Regions of R^4 with exact membership and exact sup-norm distance.

use serde::{Deserialize, Serialize};

use crate::extalg4::Vec4;

/// Interval with independently open or closed ends; infinite ends allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: true, hi_closed: true }
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_closed: false, hi_closed: false }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, t: f64) -> bool {
        let above = if self.lo_closed { t >= self.lo } else { t > self.lo };
        let below = if self.hi_closed { t <= self.hi } else { t < self.hi };
        above && below
    }

    /// Distance from `t` to the closure.
    pub fn distance(&self, t: f64) -> f64 {
        (self.lo - t).max(t - self.hi).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// Cartesian product of four intervals.
    Product { axes: [Interval; 4] },
    /// `C(X, Y, l)`: union of the closed sup-norm balls `B(tX + (1-t)Y, l)`, `t in [0, 1]`.
    Tube { from: Vec4, to: Vec4, radius: f64 },
    Union { parts: Vec<Region> },
}

impl Region {
    /// Closed sup-norm ball `B(center, radius)`.
    pub fn ball(center: Vec4, radius: f64) -> Self {
        Region::Product { axes: center.map(|c| Interval::closed(c - radius, c + radius)) }
    }

    pub fn product(axes: [Interval; 4]) -> Self {
        Region::Product { axes }
    }

    pub fn tube(from: Vec4, to: Vec4, radius: f64) -> Self {
        Region::Tube { from, to, radius }
    }

    pub fn union(parts: Vec<Region>) -> Self {
        Region::Union { parts }
    }

    /// `outer \ inner` for two products, as a union of at most eight products.
    pub fn box_difference(outer: [Interval; 4], inner: [Interval; 4]) -> Self {
        let mut parts = Vec::new();
        let mut rest = outer;
        for i in 0..4 {
            let cut = inner[i];
            let below = Interval { lo: rest[i].lo, hi: cut.lo, lo_closed: rest[i].lo_closed, hi_closed: !cut.lo_closed };
            let above = Interval { lo: cut.hi, hi: rest[i].hi, lo_closed: !cut.hi_closed, hi_closed: rest[i].hi_closed };
            for piece in [below, above] {
                let clipped = Interval {
                    lo: piece.lo.max(rest[i].lo),
                    hi: piece.hi.min(rest[i].hi),
                    lo_closed: piece.lo_closed,
                    hi_closed: piece.hi_closed,
                };
                if !clipped.is_empty() {
                    let mut axes = rest;
                    axes[i] = clipped;
                    parts.push(Region::Product { axes });
                }
            }
            // continue inside the slab of the inner interval on axis i
            rest[i] = Interval {
                lo: rest[i].lo.max(cut.lo),
                hi: rest[i].hi.min(cut.hi),
                lo_closed: if cut.lo > rest[i].lo { cut.lo_closed } else { rest[i].lo_closed && cut.lo_closed },
                hi_closed: if cut.hi < rest[i].hi { cut.hi_closed } else { rest[i].hi_closed && cut.hi_closed },
            };
            if rest[i].is_empty() {
                break;
            }
        }
        Region::Union { parts }
    }

    pub fn contains(&self, x: Vec4) -> bool {
        match self {
            Region::Product { axes } => (0..4).all(|i| axes[i].contains(x[i])),
            Region::Tube { radius, .. } => self.tube_center_distance(x) <= *radius,
            Region::Union { parts } => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// Exact sup-norm distance to the closure; 0 inside.
    pub fn distance(&self, x: Vec4) -> f64 {
        match self {
            Region::Product { axes } => (0..4).map(|i| axes[i].distance(x[i])).fold(0.0, f64::max),
            Region::Tube { radius, .. } => (self.tube_center_distance(x) - radius).max(0.0),
            Region::Union { parts } => parts.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// `min_t |x - (t from + (1-t) to)|_inf`. The objective is convex and
    /// piecewise linear in `t`, so its minimum sits at an endpoint, a zero of
    /// one coordinate difference, or a crossing of two of them.
    fn tube_center_distance(&self, x: Vec4) -> f64 {
        let Region::Tube { from, to, .. } = self else { unreachable!("tube only") };
        // x_i - p_i(t) = u_i + v_i t with p(t) = to + t (from - to)
        let u: Vec4 = [0, 1, 2, 3].map(|i| x[i] - to[i]);
        let v: Vec4 = [0, 1, 2, 3].map(|i| to[i] - from[i]);
        let f = |t: f64| (0..4).map(|i| (u[i] + v[i] * t).abs()).fold(0.0, f64::max);
        let mut best = f(0.0).min(f(1.0));
        let mut try_t = |t: f64| {
            if t.is_finite() && (0.0..=1.0).contains(&t) {
                best = best.min(f(t));
            }
        };
        for i in 0..4 {
            if v[i] != 0.0 {
                try_t(-u[i] / v[i]);
            }
            for j in i + 1..4 {
                for s in [1.0, -1.0] {
                    // u_i + v_i t = s (u_j + v_j t)
                    let den = v[i] - s * v[j];
                    if den != 0.0 {
                        try_t((s * u[j] - u[i]) / den);
                    }
                }
            }
        }
        best
    }

    /// Smallest closed box containing the region.
    pub fn bounding_box(&self) -> [[f64; 2]; 4] {
        match self {
            Region::Product { axes } => axes.map(|a| [a.lo, a.hi]),
            Region::Tube { from, to, radius } => {
                [0, 1, 2, 3].map(|i| [from[i].min(to[i]) - radius, from[i].max(to[i]) + radius])
            }
            Region::Union { parts } => {
                let mut out = [[f64::INFINITY, f64::NEG_INFINITY]; 4];
                for p in parts {
                    let b = p.bounding_box();
                    for i in 0..4 {
                        out[i][0] = out[i][0].min(b[i][0]);
                        out[i][1] = out[i][1].max(b[i][1]);
                    }
                }
                out
            }
        }
    }

    /// Largest sup-norm distance from `x` to the complement, for `x` inside a
    /// product (0 for other shapes or outside).
    pub fn depth(&self, x: Vec4) -> f64 {
        match self {
            Region::Product { axes } => {
                (0..4).map(|i| (x[i] - axes[i].lo).min(axes[i].hi - x[i])).fold(f64::INFINITY, f64::min).max(0.0)
            }
            Region::Union { parts } => parts.iter().map(|p| p.depth(x)).fold(0.0, f64::max),
            Region::Tube { radius, .. } => (radius - self.tube_center_distance(x)).max(0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tube_distance_examples() {
        let t = Region::tube([0.0, 10.0, 5.0, 0.0], [10.0, 10.0, 5.0, 0.0], 1.0);
        assert_eq!(t.distance([0.0, 10.0, 0.0, 0.0]), 4.0);
        assert_eq!(t.distance([0.0, 10.0, 0.25, 0.0]), 3.75);
        assert_eq!(t.distance([0.0, 0.0, 0.0, 0.0]), 9.0);
        assert_eq!(t.distance([5.0, 10.5, 5.5, 0.0]), 0.0);
        assert!(t.contains([11.0, 11.0, 6.0, -1.0]));
        assert!(!t.contains([11.0 + 1e-12, 11.0, 6.0, -1.0]));
    }

    #[test]
    fn diagonal_tube_uses_the_crossing_candidates() {
        let t = Region::tube([0.0; 4], [4.0, 4.0, 0.0, 0.0], 0.5);
        // the diagonal is at sup-distance 1 from (3, 1), attained at (2, 2)
        assert!((t.distance([3.0, 1.0, 0.0, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(t.distance([2.0, 2.0, 0.2, 0.0]), 0.0);
    }

    #[test]
    fn box_difference_is_a_partition() {
        let outer = [Interval::closed(-2.0, 2.0); 4];
        let inner = [Interval::closed(-2.0, 2.0), Interval::closed(-2.0, 2.0), Interval::open(-1.0, 1.0), Interval::open(-1.0, 1.0)];
        let d = Region::box_difference(outer, inner);
        for x in [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.5, -1.0], [1.9, -2.0, -1.5, 0.0]] {
            assert!(d.contains(x), "{x:?}");
        }
        for x in [[0.0, 0.0, 0.99, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 3.0, 0.0]] {
            assert!(!d.contains(x), "{x:?}");
        }
        assert_eq!(d.distance([0.0, 0.0, 0.25, 0.5]), 0.5);
    }
}
