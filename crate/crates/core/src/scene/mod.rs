//! Named points, regions and radii of the construction, the constraint
//! ledger they must satisfy, and the assembled maps.

mod file;
mod model;
mod region;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extalg4::Vec4;
use crate::maps4d::{ThetaRadii, CHI_MARGIN};
use crate::smooth1d::LAMBDA_MIN;

pub use file::{LambdaSpec, SceneFile, SolvedCoefficients, SCHEMA_VERSION};
pub use model::{Model, ModelError};
pub use region::{Interval, Region};

/// Shift that `Upsilon` applies on its plateau.
pub const DETOUR_SHIFT: Vec4 = [10.0, -10.0, -5.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Points {
    #[serde(rename = "P")]
    pub p: Vec4,
    #[serde(rename = "Q")]
    pub q: Vec4,
    #[serde(rename = "C1")]
    pub c1: Vec4,
    #[serde(rename = "C2")]
    pub c2: Vec4,
    #[serde(rename = "C3")]
    pub c3: Vec4,
    #[serde(rename = "C4")]
    pub c4: Vec4,
}

impl Default for Points {
    fn default() -> Self {
        Self {
            p: [0.0; 4],
            q: [0.0, 10.0, 0.0, 0.0],
            c1: [0.0, 10.0, 5.0, 0.0],
            c2: [10.0, 10.0, 5.0, 0.0],
            c3: [10.0, 0.0, 5.0, 0.0],
            c4: [10.0, 0.0, 0.0, 0.0],
        }
    }
}

impl Points {
    pub fn detour(&self) -> [Vec4; 4] {
        [self.c1, self.c2, self.c3, self.c4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Radii {
    /// `(a, b, c)` of each box translation, from `l_n = 1.1 - 0.1 n`.
    pub chi: [[f64; 3]; 3],
    pub theta: ThetaRadii,
}

impl Default for Radii {
    fn default() -> Self {
        let l = |n: usize| ((11 - n) as f64) / 10.0;
        Self { chi: [[l(1), l(2), l(3)], [l(4), l(5), l(6)], [l(7), l(8), l(9)]], theta: ThetaRadii::default() }
    }
}

/// Extents of `A`, `B`, `B'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionParams {
    /// half-width of `A` in `x` and `y`
    pub xy_extent: f64,
    /// half-width of `A` in `z` and `w`; `lambda^2` when absent
    pub zw_extent: Option<f64>,
    /// `B = {X in A : max(|z|, |w|) >= b_threshold}`
    pub b_threshold: f64,
    /// `B' = {X in A : max(|z|, |w|) >= bp_threshold}`
    pub bp_threshold: f64,
}

impl Default for RegionParams {
    fn default() -> Self {
        Self { xy_extent: 20.0, zw_extent: None, b_threshold: 1.0, bp_threshold: 7.0 }
    }
}

/// Everything that determines a scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneParams {
    pub lambda: f64,
    pub points: Points,
    pub radii: Radii,
    pub regions: RegionParams,
    /// Whether `Omega` includes the detour `Upsilon`.
    pub upsilon: bool,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self::with_lambda(100.0)
    }
}

impl SceneParams {
    pub fn with_lambda(lambda: f64) -> Self {
        Self { lambda, points: Points::default(), radii: Radii::default(), regions: RegionParams::default(), upsilon: true }
    }
}

/// One machine-checked constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub id: String,
    pub description: String,
    /// Positive when satisfied, where a scalar margin makes sense.
    pub margin: Option<f64>,
    pub satisfied: bool,
}

impl LedgerEntry {
    fn margin(id: &str, description: &str, margin: f64) -> Self {
        Self { id: id.into(), description: description.into(), margin: Some(margin), satisfied: margin > 0.0 }
    }

    fn margin_inclusive(id: &str, description: &str, margin: f64) -> Self {
        Self { id: id.into(), description: description.into(), margin: Some(margin), satisfied: margin >= 0.0 }
    }

    fn flag(id: &str, description: &str, satisfied: bool) -> Self {
        Self { id: id.into(), description: description.into(), margin: None, satisfied }
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("lambda = {0} is below the admissible minimum {LAMBDA_MIN}")]
    LambdaTooSmall(f64),
    #[error("constraint ledger violated: {}", .0.iter().map(|e| e.id.as_str()).collect::<Vec<_>>().join(", "))]
    Ledger(Vec<LedgerEntry>),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed scene file at `{field}`: {message}")]
    Parse { field: String, message: String },
    #[error("scene schema version {found} is not supported (expected {SCHEMA_VERSION})")]
    SchemaVersion { found: u32 },
    #[error("scene lambda is `auto`; resolve it before building")]
    UnresolvedLambda,
}

/// Regions derived from the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Regions {
    pub a: Region,
    pub b: Region,
    pub bp: Region,
    pub c: Region,
    /// Union of the three detour tubes.
    pub d: Region,
    pub tubes: [Region; 3],
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    params: SceneParams,
    regions: Regions,
    ledger: Vec<LedgerEntry>,
    tuning: Option<(f64, f64)>,
}

fn sup_norm(v: Vec4) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn zw_outside(t: f64, a: [Interval; 4]) -> Region {
    let full = |i: usize| Interval::closed(a[i].lo, a[i].hi);
    Region::box_difference(a, [full(0), full(1), Interval::open(-t, t), Interval::open(-t, t)])
}

/// `min_t dist(region, (1 - t) a + t b)` by golden-section search; the
/// objective is convex for convex regions.
pub fn segment_distance(region: &Region, a: Vec4, b: Vec4) -> f64 {
    let at = |t: f64| region.distance([0, 1, 2, 3].map(|i| a[i] + t * (b[i] - a[i])));
    if let Region::Union { parts } = region {
        return parts.iter().map(|p| segment_distance(p, a, b)).fold(f64::INFINITY, f64::min);
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let m1 = hi - g * (hi - lo);
        let m2 = lo + g * (hi - lo);
        if at(m1) <= at(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    at(0.5 * (lo + hi)).min(at(0.0)).min(at(1.0))
}

impl Scene {
    pub fn new(params: SceneParams) -> Result<Self, SceneError> {
        let lambda = params.lambda;
        if lambda.is_nan() || lambda < LAMBDA_MIN {
            return Err(SceneError::LambdaTooSmall(lambda));
        }
        let regions = Self::build_regions(&params);
        let ledger = Self::check_ledger(&params, &regions);
        let failures: Vec<LedgerEntry> = ledger.iter().filter(|e| !e.satisfied).cloned().collect();
        if !failures.is_empty() {
            return Err(SceneError::Ledger(failures));
        }
        Ok(Self { params, regions, ledger, tuning: None })
    }

    /// Default scene at the given `lambda`.
    pub fn default_with_lambda(lambda: f64) -> Result<Self, SceneError> {
        Self::new(SceneParams::with_lambda(lambda))
    }

    fn build_regions(p: &SceneParams) -> Regions {
        let r = &p.regions;
        let zw = r.zw_extent.unwrap_or(p.lambda * p.lambda);
        let a_axes = [
            Interval::closed(-r.xy_extent, r.xy_extent),
            Interval::closed(-r.xy_extent, r.xy_extent),
            Interval::closed(-zw, zw),
            Interval::closed(-zw, zw),
        ];
        let c_axes = [
            a_axes[0],
            a_axes[1],
            Interval::open(-r.b_threshold, r.b_threshold),
            Interval::open(-r.b_threshold, r.b_threshold),
        ];
        let cs = p.points.detour();
        let tubes = [0, 1, 2].map(|i| Region::tube(cs[i], cs[i + 1], p.radii.chi[i][0]));
        Regions {
            a: Region::product(a_axes),
            b: zw_outside(r.b_threshold, a_axes),
            bp: zw_outside(r.bp_threshold, a_axes),
            c: Region::product(c_axes),
            d: Region::union(tubes.to_vec()),
            tubes,
        }
    }

    fn check_ledger(p: &SceneParams, regions: &Regions) -> Vec<LedgerEntry> {
        let mut out = Vec::new();
        let pts = &p.points;
        let cs = pts.detour();
        let r = &p.regions;
        let zw = r.zw_extent.unwrap_or(p.lambda * p.lambda);

        out.push(LedgerEntry::margin_inclusive("lambda_min", "lambda >= 100", p.lambda - LAMBDA_MIN));

        let shift_dev = sup_norm([0, 1, 2, 3].map(|i| cs[3][i] - cs[0][i] - DETOUR_SHIFT[i]));
        out.push(LedgerEntry::flag("detour_shift", "C4 - C1 = (10, -10, -5, 0)", shift_dev <= 1e-12));

        for i in 0..3 {
            let (y, z) = (cs[i], cs[i + 1]);
            let [a, b, c] = p.radii.chi[i];
            let moving = (0..4).filter(|&k| y[k] != z[k]).count();
            out.push(LedgerEntry::flag(&format!("leg{}_axis_aligned", i + 1), "leg differs in exactly one coordinate", moving == 1));
            out.push(LedgerEntry::margin(
                &format!("leg{}_length", i + 1),
                "leg length exceeds twice its outer radius",
                sup_norm([0, 1, 2, 3].map(|k| z[k] - y[k])) - 2.0 * a,
            ));
            out.push(LedgerEntry::margin(
                &format!("chi{}_radii", i + 1),
                "a > b > c > 0 with room for both eta transition margins",
                (a - b).min(b - c - 2.0 * CHI_MARGIN).min(c),
            ));
        }
        let [c1, c2, c3] = [p.radii.chi[0][2], p.radii.chi[1][2], p.radii.chi[2][2]];
        out.push(LedgerEntry::margin_inclusive(
            "upsilon_plateau_chain",
            "each translated plateau lands inside the next one",
            c1.min(c2) - c3,
        ));

        let dbox = regions.d.bounding_box();
        let d_zw = dbox[2][0].abs().max(dbox[2][1].abs()).max(dbox[3][0].abs()).max(dbox[3][1].abs());
        out.push(LedgerEntry::margin("D_avoids_Bp", "max over D of max(|z|, |w|) < B' threshold", r.bp_threshold - d_zw));
        let a_ext = [r.xy_extent, r.xy_extent, zw, zw];
        let d_in_a = (0..4).map(|i| (a_ext[i] - dbox[i][1]).min(dbox[i][0] + a_ext[i])).fold(f64::INFINITY, f64::min);
        out.push(LedgerEntry::margin("D_inside_A", "D lies in the interior of A", d_in_a));

        let outer = p.radii.theta.outer;
        out.push(LedgerEntry::margin("Bl_P_avoids_D", "B_l(P) and D are disjoint", regions.d.distance(pts.p) - outer));
        out.push(LedgerEntry::margin("Bl_Q_avoids_D", "B_l(Q) and D are disjoint", regions.d.distance(pts.q) - outer));
        out.push(LedgerEntry::margin(
            "theta_radii",
            "inner < outer and B_l(P), B_l(Q) are disjoint",
            (outer - p.radii.theta.inner).min(sup_norm([0, 1, 2, 3].map(|i| pts.q[i] - pts.p[i])) - 2.0 * outer),
        ));
        out.push(LedgerEntry::margin("P_in_C", "P lies in C", regions.c.depth(pts.p)));
        out.push(LedgerEntry::margin("Q_in_C", "Q lies in C", regions.c.depth(pts.q)));
        out.push(LedgerEntry::margin(
            "thresholds",
            "B threshold < B' threshold < zw-extent of A",
            (r.bp_threshold - r.b_threshold).min(zw - r.bp_threshold),
        ));
        out.push(LedgerEntry::margin(
            "PQ_segment_avoids_D",
            "the segment from P to Q stays away from D",
            segment_distance(&regions.d, pts.p, pts.q),
        ));
        out
    }

    pub fn params(&self) -> &SceneParams {
        &self.params
    }

    pub fn lambda(&self) -> f64 {
        self.params.lambda
    }

    pub fn points(&self) -> &Points {
        &self.params.points
    }

    pub fn radii(&self) -> &Radii {
        &self.params.radii
    }

    pub fn regions(&self) -> &Regions {
        &self.regions
    }

    pub fn ledger(&self) -> &[LedgerEntry] {
        &self.ledger
    }

    pub fn has_upsilon(&self) -> bool {
        self.params.upsilon
    }

    /// Half-width of `A` in `z` and `w`.
    pub fn zw_extent(&self) -> f64 {
        self.params.regions.zw_extent.unwrap_or(self.params.lambda * self.params.lambda)
    }

    pub fn tuning(&self) -> Option<(f64, f64)> {
        self.tuning
    }

    /// Records a tuned `lambda0` and the measured constant `K`.
    pub fn with_tuning(mut self, lambda0: f64, k: f64) -> Self {
        self.tuning = Some((lambda0, k));
        self
    }

    /// Same scene at a different `lambda`.
    pub fn at_lambda(&self, lambda: f64) -> Result<Self, SceneError> {
        let mut p = self.params;
        p.lambda = lambda;
        Self::new(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scene_distances() {
        let s = Scene::default_with_lambda(100.0).unwrap();
        let d = &s.regions().d;
        assert_eq!(d.distance(s.points().q), 4.0);
        assert_eq!(d.distance(s.points().p), 9.0);
        assert_eq!(d.distance([0.0, 10.0, 0.25, 0.0]), 3.75);
        let bb = d.bounding_box();
        assert_eq!(bb[2][1].max(bb[3][1]), 6.0);
        assert!(s.ledger().iter().all(|e| e.satisfied));
    }

    #[test]
    fn rejects_small_lambda_and_bad_legs() {
        assert!(matches!(Scene::default_with_lambda(20.0), Err(SceneError::LambdaTooSmall(_))));
        let mut p = SceneParams::default();
        p.points.c2 = [10.0, 10.0, 5.0, 0.5];
        match Scene::new(p) {
            Err(SceneError::Ledger(f)) => assert!(f.iter().any(|e| e.id == "leg1_axis_aligned")),
            other => panic!("expected ledger failure, got {other:?}"),
        }
    }

    #[test]
    fn regions_membership() {
        let s = Scene::default_with_lambda(100.0).unwrap();
        let r = s.regions();
        assert!(r.c.contains([0.0, 10.0, 0.999, -0.5]));
        assert!(!r.c.contains([0.0, 10.0, 1.0, 0.0]));
        assert!(r.b.contains([0.0, 10.0, 1.0, 0.0]));
        assert!(r.bp.contains([0.0, 0.0, 0.0, -7.0]));
        assert!(!r.bp.contains([0.0, 0.0, 6.99, 0.0]));
        assert!(r.a.contains([20.0, -20.0, 1e4, -1e4]));
    }
}
