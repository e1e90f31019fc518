//! Volume expansion on `C`: the constants of the factorized bound, the
//! direct grid minimum of `m(Lambda^3 dOmega)`, and the `lambda` search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{better, par_argmin, BoxGrid};
use super::{ConditionReport, VerificationConfig, VerifyError};
use crate::extalg4::{conorm, wedge3, Mat4, Vec4};
use crate::maps4d::DiffeoMap4;
use crate::scene::{Model, Region, Scene};
use crate::smooth1d::ScalarMap1D;

/// `m(Lambda^3 M)`.
pub fn conorm3(m: &Mat4) -> f64 {
    conorm(&wedge3(m))
}

/// Lambda-independent ingredients of the factorized lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConstants {
    /// `min F'` and `min G'` over the `x`, `y` extent of `A`.
    pub c1: f64,
    pub c2: f64,
    /// `min(c1 c2, c1, c2)`.
    pub c: f64,
    /// `min m(Lambda^3 dTheta)` on the coarse and refined support grids.
    pub c_theta: [f64; 2],
    pub c_theta_witness: Vec4,
    /// Same for `Upsilon` over the tubes of `D`.
    pub c_upsilon: [f64; 2],
    pub c_upsilon_witness: Vec4,
    pub samples: u64,
}

impl ExpansionConstants {
    pub fn theta(&self) -> f64 {
        self.c_theta[0].min(self.c_theta[1])
    }

    pub fn upsilon(&self) -> f64 {
        self.c_upsilon[0].min(self.c_upsilon[1])
    }

    /// `c_Upsilon c_Theta min(c1 c2 lambda, c1 lambda^2, c2 lambda^2)`; the
    /// detour factor is dropped when the scene has none.
    pub fn bound(&self, lambda: f64, with_detour: bool) -> f64 {
        let cu = if with_detour { self.upsilon() } else { 1.0 };
        let psi = (self.c1 * self.c2 * lambda).min(self.c1 * lambda * lambda).min(self.c2 * lambda * lambda);
        cu * self.theta() * psi
    }

    /// Smallest `lambda` at which the factorized bound exceeds 1.
    pub fn lambda_needed(&self, with_detour: bool) -> f64 {
        let cu = if with_detour { self.upsilon() } else { 1.0 };
        let k = cu * self.theta();
        let linear = 1.0 / (k * self.c1 * self.c2);
        let quadratic = (1.0 / (k * self.c1.min(self.c2))).sqrt();
        linear.max(quadratic)
    }

    fn agreement(pair: [f64; 2]) -> f64 {
        (pair[0] - pair[1]).abs() / pair[0].abs().min(pair[1].abs())
    }

    /// Reports for `c_theta`, `c_upsilon` and the scalar rates.
    pub fn reports(&self, cfg: &VerificationConfig) -> Vec<ConditionReport> {
        let pair = |id: &str, v: [f64; 2], w: Vec4| {
            let dis = Self::agreement(v);
            let margin = (cfg.refine_tol - dis).min(v[0].min(v[1]));
            ConditionReport::from_margin(id, margin, w, self.samples)
                .with("coarse", v[0])
                .with("refined", v[1])
                .with("relative_disagreement", dis)
        };
        vec![
            pair("c_theta", self.c_theta, self.c_theta_witness),
            pair("c_upsilon", self.c_upsilon, self.c_upsilon_witness),
            ConditionReport::evidence("scalar_rates", 0).with("c1", self.c1).with("c2", self.c2).with("c", self.c),
        ]
    }
}

/// Seeds kept per objective for local zooming.
const SEEDS: usize = 8;
/// Zoom levels; each halves the local window.
const ZOOM_LEVELS: usize = 16;
/// Nodes per axis of a zoom window.
const ZOOM_NODES: usize = 5;

/// Grid minimum of one objective, polished by local zooms around the best
/// grid blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub value: f64,
    pub witness: Vec4,
    /// Value at the best plain grid point, before zooming.
    pub grid_value: f64,
    pub samples: u64,
}

fn zoom<const K: usize>(f: &(impl Fn(Vec4) -> [f64; K] + Sync), j: usize, x0: Vec4, v0: f64, cell: Vec4, bounds: [[f64; 2]; 4]) -> (f64, Vec4, u64) {
    let (mut best, mut at) = (v0, x0);
    let mut h = cell;
    let mut evals = 0;
    for _ in 0..ZOOM_LEVELS {
        let win = [0, 1, 2, 3].map(|i| [(at[i] - h[i]).max(bounds[i][0]), (at[i] + h[i]).min(bounds[i][1])]);
        let centre = at;
        for k in 0..ZOOM_NODES.pow(4) {
            let idx = [k / ZOOM_NODES.pow(3), (k / ZOOM_NODES.pow(2)) % ZOOM_NODES, (k / ZOOM_NODES) % ZOOM_NODES, k % ZOOM_NODES];
            let x = [0, 1, 2, 3].map(|i| win[i][0] + (win[i][1] - win[i][0]) * idx[i] as f64 / (ZOOM_NODES - 1) as f64);
            let v = f(x)[j];
            evals += 1;
            if v < best || v.is_nan() && !best.is_nan() {
                best = v;
                at = x;
            }
        }
        if at == centre {
            h = h.map(|c| 0.5 * c);
        }
    }
    (best, at, evals)
}

/// Minima of `K` objectives over cell-centred grids on `boxes`, each then
/// polished by zooming around the best `SEEDS` blocks of its grid.
pub(super) fn scan_min<const K: usize>(
    boxes: &[[[f64; 2]; 4]],
    n: usize,
    f: impl Fn(Vec4) -> [f64; K] + Sync + Send,
) -> [Minimum; K] {
    let grids: Vec<BoxGrid> = boxes.iter().map(|&b| BoxGrid::new(b, n)).filter(|g| !g.is_empty()).collect();
    let per = n.pow(4);
    let block = n.pow(3);
    let blocks: Vec<[(f64, usize); K]> = (0..grids.len() * n)
        .into_par_iter()
        .map(|b| {
            let mut best = [(f64::INFINITY, usize::MAX); K];
            for k in b * block..(b + 1) * block {
                let v = f(grids[k / per].point(k % per));
                for j in 0..K {
                    if better((v[j], k), best[j]) {
                        best[j] = (v[j], k);
                    }
                }
            }
            best
        })
        .collect();
    let total = (grids.len() * per) as u64;
    let at = |k: usize| grids[k / per].point(k % per);
    (0..K).map(|j| {
        let mut cands: Vec<(f64, usize)> = blocks.iter().map(|b| b[j]).filter(|c| c.1 != usize::MAX).collect();
        cands.sort_by(|a, b| if better(*a, *b) { std::cmp::Ordering::Less } else { std::cmp::Ordering::Greater });
        cands.truncate(SEEDS);
        let Some(&(grid_value, gk)) = cands.first() else {
            return Minimum { value: f64::INFINITY, witness: [0.0; 4], grid_value: f64::INFINITY, samples: 0 };
        };
        let zoomed: Vec<(f64, Vec4, u64)> = cands
            .par_iter()
            .map(|&(v, k)| {
                let g = &grids[k / per];
                let cell = g.bounds.map(|b| (b[1] - b[0]) / n as f64);
                zoom(&f, j, at(k), v, cell, g.bounds)
            })
            .collect();
        let mut out = Minimum { value: grid_value, witness: at(gk), grid_value, samples: total };
        for (v, x, e) in zoomed {
            out.samples += e;
            if v < out.value || v.is_nan() && !out.value.is_nan() {
                out.value = v;
                out.witness = x;
            }
        }
        out
    }).collect::<Vec<_>>().try_into().expect("K minima")
}

fn scalar_min_derivative(map: &dyn ScalarMap1D, r: f64) -> f64 {
    let n = 100_000;
    par_argmin(n + 1, |k| map.derivative(-r + 2.0 * r * k as f64 / n as f64)).map_or(f64::NAN, |p| p.0)
}

/// Measures `c1`, `c2`, `c_Theta`, `c_Upsilon` on `model`'s scene.
pub fn expansion_constants(model: &Model, cfg: &VerificationConfig) -> ExpansionConstants {
    let xy = model.scene.params().regions.xy_extent;
    let c1 = scalar_min_derivative(model.f.as_ref(), xy);
    let c2 = scalar_min_derivative(model.g.as_ref(), xy);
    let (p, q) = model.theta.centers();
    let rl = model.theta.radii().large_box();
    let theta_boxes = [p, q].map(|c| c.map(|v| [v - rl, v + rl]));
    let tube_boxes: Vec<_> = model.scene.regions().tubes.iter().map(Region::bounding_box).collect();
    let theta = model.theta.as_ref();
    let ups = model.upsilon.as_ref();
    let mut samples = 0;
    let mut c_theta = [0.0; 2];
    let mut c_upsilon = [0.0; 2];
    let (mut tw, mut uw) = ([0.0; 4], [0.0; 4]);
    for (i, n) in [cfg.grid, 2 * cfg.grid].into_iter().enumerate() {
        let [t] = scan_min(&theta_boxes, n, |x| [conorm3(&theta.jacobian(x))]);
        c_theta[i] = t.value;
        samples += t.samples;
        if i == 0 || t.value < c_theta[0] {
            tw = t.witness;
        }
        let [u] = scan_min(&tube_boxes, n, |x| [conorm3(&ups.jacobian(x))]);
        c_upsilon[i] = u.value;
        samples += u.samples;
        if i == 0 || u.value < c_upsilon[0] {
            uw = u.witness;
        }
    }
    ExpansionConstants {
        c1,
        c2,
        c: (c1 * c2).min(c1).min(c2),
        c_theta,
        c_theta_witness: tw,
        c_upsilon,
        c_upsilon_witness: uw,
        samples,
    }
}

/// Minima of `m(Lambda^3 dOmega)` and `m(Lambda^3 dPhi)` on one grid level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub n: usize,
    pub omega: Minimum,
    pub phi: Minimum,
}

/// Boxes of `C` to scan: `C` itself and the parts of `C` that `Psi` sends
/// into the supports of `Theta` and `Upsilon`, which are too thin for a
/// uniform grid to hit.
fn scan_boxes(model: &Model) -> Vec<[[f64; 2]; 4]> {
    let c = model.scene.regions().c.bounding_box();
    let mut out = vec![c];
    let (p, q) = model.theta.centers();
    let rl = model.theta.radii().large_box();
    let mut targets: Vec<[[f64; 2]; 4]> = [p, q].iter().map(|c| c.map(|v| [v - rl, v + rl])).collect();
    targets.extend(model.scene.regions().tubes.iter().map(Region::bounding_box));
    let maps: [&dyn ScalarMap1D; 4] = [model.f.as_ref(), model.g.as_ref(), model.h.as_ref(), model.h.as_ref()];
    for t in targets {
        let mut b = [[0.0; 2]; 4];
        let mut empty = false;
        for i in 0..4 {
            let (lo, hi) = match (maps[i].inverse(t[i][0]), maps[i].inverse(t[i][1])) {
                (Ok(lo), Ok(hi)) => (lo.max(c[i][0]), hi.min(c[i][1])),
                _ => (c[i][0], c[i][1]),
            };
            empty |= !(lo < hi);
            b[i] = [lo, hi];
        }
        if !empty {
            out.push(b);
        }
    }
    out
}

fn grid_minimum(model: &Model, n: usize) -> GridMinimum {
    let boxes = scan_boxes(model);
    let detour = model.scene.has_upsilon();
    let [omega, phi] = scan_min(&boxes, n, |x| {
        let (y, jphi) = model.phi.eval_with_jacobian(x);
        let jo = if detour { model.upsilon.jacobian(y) * jphi } else { jphi };
        [conorm3(&jo), conorm3(&jphi)]
    });
    GridMinimum { n, omega, phi }
}

/// Result of [`check_expansion`] at one `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub lambda: f64,
    pub coarse: GridMinimum,
    pub refined: Option<GridMinimum>,
    /// Relative difference of the two levels' `Omega` minima.
    pub disagreement: Option<f64>,
    pub factorized_bound: f64,
    /// `c_Theta c lambda`, the claimed lower bound for `Phi`.
    pub phi_bound: f64,
}

impl ExpansionReport {
    /// Cumulative minimum over the levels run, so it never increases under refinement.
    pub fn omega_min(&self) -> (f64, Vec4) {
        match &self.refined {
            Some(r) if r.omega.value < self.coarse.omega.value => (r.omega.value, r.omega.witness),
            _ => (self.coarse.omega.value, self.coarse.omega.witness),
        }
    }

    pub fn phi_min(&self) -> (f64, Vec4) {
        match &self.refined {
            Some(r) if r.phi.value < self.coarse.phi.value => (r.phi.value, r.phi.witness),
            _ => (self.coarse.phi.value, self.coarse.phi.witness),
        }
    }

    pub fn samples(&self) -> u64 {
        self.coarse.omega.samples + self.refined.map_or(0, |r| r.omega.samples)
    }
}

/// Scans `C` at the configured grid and, if `refine`, at twice that.
pub fn check_expansion(model: &Model, constants: &ExpansionConstants, cfg: &VerificationConfig, refine: bool) -> ExpansionReport {
    let lambda = model.lambda();
    let coarse = grid_minimum(model, cfg.grid);
    let refined = refine.then(|| grid_minimum(model, 2 * cfg.grid));
    let disagreement = refined.map(|r| ExpansionConstants::agreement([coarse.omega.value, r.omega.value]));
    ExpansionReport {
        lambda,
        coarse,
        refined,
        disagreement,
        factorized_bound: constants.bound(lambda, model.scene.has_upsilon()),
        phi_bound: constants.theta() * constants.c * lambda,
    }
}

/// One rung of the `lambda` ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuneStep {
    pub lambda: f64,
    pub direct_min: f64,
    pub factorized_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningReport {
    /// `lambda0` on success, otherwise the cap.
    pub lambda: f64,
    pub success: bool,
    /// Measured `K` at `lambda0`.
    pub k: Option<f64>,
    pub steps: Vec<TuneStep>,
    /// Coarse direct minimum at `2 lambda0`, as monotonicity evidence.
    pub at_double: Option<f64>,
    pub constants: ExpansionConstants,
    /// `lambda` the factorized bound would need.
    pub lambda_needed: f64,
    pub limiting: String,
}

fn ladder(cfg: &VerificationConfig) -> Vec<f64> {
    let mut out = Vec::new();
    let mut l = cfg.tune_start;
    while l <= cfg.tune_cap {
        out.push(l);
        l *= 2.0;
    }
    if out.last() != Some(&cfg.tune_cap) {
        out.push(cfg.tune_cap);
    }
    out
}

/// Smallest `lambda` on the doubling ladder from `tune_start` (capped at
/// `tune_cap`) whose direct grid minimum over `C` exceeds 1.
pub fn auto_tune_lambda(scene: &Scene, cfg: &VerificationConfig) -> Result<TuningReport, VerifyError> {
    let detour = scene.has_upsilon();
    let base = Model::build(&scene.at_lambda(cfg.tune_start)?)?;
    let constants = expansion_constants(&base, cfg);
    let mut steps = Vec::new();
    let mut found = None;
    for lambda in ladder(cfg) {
        let model = if lambda == cfg.tune_start { base.clone() } else { Model::build(&scene.at_lambda(lambda)?)? };
        let coarse = grid_minimum(&model, cfg.grid);
        steps.push(TuneStep { lambda, direct_min: coarse.omega.value, factorized_bound: constants.bound(lambda, detour) });
        if coarse.omega.value > 1.0 {
            found = Some((lambda, coarse.omega.value));
            break;
        }
    }
    let named = [("c_theta", constants.theta()), ("c_upsilon", if detour { constants.upsilon() } else { 1.0 }), ("c1 c2", constants.c1 * constants.c2)];
    let limiting = named.iter().min_by(|a, b| a.1.total_cmp(&b.1)).map(|(n, v)| format!("{n} = {v:.4e}")).unwrap_or_default();
    let lambda_needed = constants.lambda_needed(detour);
    Ok(match found {
        Some((lambda, k)) => {
            let double = Model::build(&scene.at_lambda(2.0 * lambda)?)?;
            TuningReport {
                lambda,
                success: true,
                k: Some(k),
                steps,
                at_double: Some(grid_minimum(&double, cfg.grid).omega.value),
                constants,
                lambda_needed,
                limiting,
            }
        }
        None => TuningReport { lambda: cfg.tune_cap, success: false, k: None, steps, at_double: None, constants, lambda_needed, limiting },
    })
}
