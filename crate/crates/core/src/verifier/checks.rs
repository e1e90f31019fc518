//! Support, trapping, fixed-point spectra, orbit certificates and the
//! domination diagnostic, plus the assembly of the (Φ) and (w) conditions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expansion::{ExpansionConstants, ExpansionReport};
use super::sampling::{facet_points, halton4, par_argmin, uniform_in};
use super::{ConditionReport, VerificationConfig, VerifyError};
use crate::extalg4::{singular_values, spectrum, Mat4, Vec4};
use crate::maps4d::{sup_dist, DiffeoMap4};
use crate::scene::{Model, Region, Scene};
use crate::smooth1d::ScalarMap1D;

fn euclid(a: Vec4, b: Vec4) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

fn parts(region: &Region) -> Vec<&Region> {
    match region {
        Region::Union { parts } => parts.iter().collect(),
        other => vec![other],
    }
}

/// Exterior probes of `claimed`: sup-norm shells at growing offsets around
/// each part's bounding box, plus scattered points around the whole region.
fn exterior_points(claimed: &Region, samples: usize, seed: u64) -> Vec<Vec4> {
    let pieces = parts(claimed);
    let share = samples / (pieces.len() + 1);
    let offsets = [1e-9, 1e-6, 1e-3, 1e-2, 0.1, 0.5, 1.0, 3.0];
    let mut out = Vec::with_capacity(samples);
    for (pi, part) in pieces.iter().enumerate() {
        let bb = part.bounding_box();
        let centre = bb.map(|b| 0.5 * (b[0] + b[1]));
        let half = bb.map(|b| 0.5 * (b[1] - b[0]));
        for (k, u) in halton4(share, seed.wrapping_add(pi as u64)).into_iter().enumerate() {
            let mut v = u.map(|c| 2.0 * c - 1.0);
            let j = (0..4).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
            v[j] = if v[j] < 0.0 { -1.0 } else { 1.0 };
            let grow = offsets[k % offsets.len()];
            out.push([0, 1, 2, 3].map(|i| centre[i] + v[i] * (half[i] * (1.0 + grow) + grow)));
        }
    }
    let bb = claimed.bounding_box();
    let wide = bb.map(|b| {
        let pad = 0.25 * (b[1] - b[0]) + 1.0;
        [b[0] - pad, b[1] + pad]
    });
    out.extend(uniform_in(wide, samples - out.len(), seed ^ 0xa5a5));
    out.retain(|&x| !claimed.contains(x));
    out
}

/// Samples points outside `claimed` and checks that `map` fixes them to 1e-12.
/// Margin: `1e-12 - max deviation`.
pub fn check_support(id: &str, map: &dyn DiffeoMap4, claimed: &Region, samples: usize, seed: u64) -> ConditionReport {
    let pts = exterior_points(claimed, samples, seed);
    let (dev, k) = par_argmin(pts.len(), |k| -sup_dist(map.eval(pts[k]), pts[k])).map_or((0.0, 0), |(d, k)| (-d, k));
    let witness = pts.get(k).copied().unwrap_or([0.0; 4]);
    ConditionReport::from_margin(id, 1e-12 - dev, witness, pts.len() as u64).with("max_deviation", dev)
}

/// Signed sup-norm depth: positive inside `region`, minus the distance outside.
fn signed_depth(region: &Region, x: Vec4) -> f64 {
    if region.contains(x) {
        region.depth(x)
    } else {
        -region.distance(x)
    }
}

/// Facet grids of `A`, and of `B` (outer facets that lie in `B` plus the
/// inner facets `max(|z|, |w|) = b`).
fn boundary_samples(scene: &Scene, n: usize) -> (Vec<Vec4>, Vec<Vec4>) {
    let r = scene.regions();
    let a_box = r.a.bounding_box();
    let a_pts = facet_points(a_box, n);
    let t = scene.params().regions.b_threshold;
    let mut b_pts: Vec<Vec4> = a_pts.iter().copied().filter(|&x| r.b.contains(x)).collect();
    let inner = [a_box[0], a_box[1], [-t, t], [-t, t]];
    b_pts.extend(facet_points(inner, n).into_iter().filter(|x| x[2].abs() == t || x[3].abs() == t));
    (a_pts, b_pts)
}

fn worst_depth(map: &dyn DiffeoMap4, pts: &[Vec4], target: &Region) -> (f64, Vec4) {
    par_argmin(pts.len(), |k| signed_depth(target, map.eval(pts[k]))).map_or((f64::INFINITY, [0.0; 4]), |(m, k)| (m, pts[k]))
}

/// Exact margins from the product structure: `Psi` maps `A` into the box
/// of coordinate images, `Theta` and `Upsilon` act inside their own
/// supports, and `H(b) >= H(b_threshold)` puts `Psi(B)` deep in `z` or `w`.
fn structural_margins(model: &Model, with_detour: bool) -> (f64, f64, f64) {
    let s = &model.scene;
    let r = s.params().regions;
    let (xy, zw) = (r.xy_extent, s.zw_extent());
    let f: &dyn ScalarMap1D = model.f.as_ref();
    let g: &dyn ScalarMap1D = model.g.as_ref();
    let h: &dyn ScalarMap1D = model.h.as_ref();
    let coord = (xy - f.value(xy).abs().max(f.value(-xy).abs()))
        .min(xy - g.value(xy).abs().max(g.value(-xy).abs()))
        .min(zw - h.value(zw).abs().max(h.value(-zw).abs()));
    let a = &s.regions().a;
    let (p, q) = model.theta.centers();
    let rl = model.theta.radii().large_box();
    let mut supports = vec![Region::ball(p, rl), Region::ball(q, rl)];
    if with_detour {
        supports.extend(s.regions().tubes.iter().cloned());
    }
    let inside_a = supports
        .iter()
        .map(|sup| {
            let bb = sup.bounding_box();
            let ab = a.bounding_box();
            (0..4).map(|i| (bb[i][0] - ab[i][0]).min(ab[i][1] - bb[i][1])).fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    let zw_of_supports = supports
        .iter()
        .map(|sup| {
            let bb = sup.bounding_box();
            bb[2][0].abs().max(bb[2][1].abs()).max(bb[3][0].abs()).max(bb[3][1].abs())
        })
        .fold(0.0, f64::max);
    // Psi(B) lies where max(|z|, |w|) >= H(b), inside B' when H(b) > bp,
    // and no support reaches B'
    let side = r.bp_threshold - zw_of_supports;
    let b_margin = if side > 0.0 { h.value(r.b_threshold) - r.bp_threshold } else { side };
    (coord.min(inside_a), b_margin, side)
}

/// `map(A) in int(A)` and `map(B) in int(target_b)`, sampled on boundary
/// grids and argued structurally. Margin: the smallest of the four.
pub fn check_trapping(
    id: &str,
    model: &Model,
    map: &dyn DiffeoMap4,
    target_b: &Region,
    with_detour: bool,
    cfg: &VerificationConfig,
) -> ConditionReport {
    let scene = &model.scene;
    let (a_pts, b_pts) = boundary_samples(scene, cfg.boundary_grid);
    let (ma, wa) = worst_depth(map, &a_pts, &scene.regions().a);
    let (mb, wb) = worst_depth(map, &b_pts, target_b);
    let (sa, sb, side) = structural_margins(model, with_detour);
    let witness = if ma <= mb { wa } else { wb };
    ConditionReport::from_margin(id, ma.min(mb).min(sa).min(sb), witness, (a_pts.len() + b_pts.len()) as u64)
        .with("sampled_margin_A", ma)
        .with("sampled_margin_B", mb)
        .with("structural_margin_A", sa)
        .with("structural_margin_B", sb)
        .with("supports_below_Bp", side)
        .with("samples_A", a_pts.len() as f64)
        .with("samples_B", b_pts.len() as f64)
}

/// Fixed-point residuals and spectra at `P` and `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSpectra {
    pub fixed: ConditionReport,
    pub at_p: ConditionReport,
    pub at_q: ConditionReport,
}

fn spectrum_report(id: &str, m: &Mat4, at: Vec4, index: usize, non_real_slots: &[usize]) -> Result<ConditionReport, VerifyError> {
    let sp = spectrum(m)?;
    let moduli = sp.moduli();
    let gap = moduli.iter().map(|r| (r - 1.0).abs()).fold(f64::INFINITY, f64::min);
    let im = non_real_slots.iter().map(|&i| sp.eigenvalues[i].im.abs()).fold(f64::INFINITY, f64::min);
    let ok = sp.expanding == index && sp.contracting == 4 - index && non_real_slots.iter().all(|&i| crate::extalg4::is_non_real(sp.eigenvalues[i]));
    let mut r = ConditionReport::from_margin(id, gap.min(im), at, 1)
        .with("index", sp.expanding as f64)
        .with("non_real", sp.non_real as f64);
    for (i, z) in sp.eigenvalues.iter().enumerate() {
        r = r.with(&format!("modulus_{i}"), moduli[i]).with(&format!("re_{i}"), z.re).with(&format!("im_{i}"), z.im);
    }
    Ok(if ok { r } else { r.fail_because(format!("need index {index} with eigenvalues {non_real_slots:?} non-real")) })
}

/// `P`, `Q` fixed to 1e-12 and lying in `C`; `ind(P) = 3` with the middle
/// pair non-real; `ind(Q) = 2` with all four non-real.
pub fn check_fixed_spectra(ids: [&str; 3], map: &dyn DiffeoMap4, scene: &Scene) -> Result<FixedSpectra, VerifyError> {
    let pts = scene.points();
    let (p, q) = (pts.p, pts.q);
    let (rp, rq) = (sup_dist(map.eval(p), p), sup_dist(map.eval(q), q));
    let c = &scene.regions().c;
    let depth = c.depth(p).min(c.depth(q));
    let fixed = if rp.max(rq) <= 1e-12 {
        ConditionReport::from_margin(ids[0], depth, if c.depth(p) <= c.depth(q) { p } else { q }, 2)
    } else {
        ConditionReport::from_margin(ids[0], -rp.max(rq), if rp >= rq { p } else { q }, 2)
    };
    let fixed = fixed.with("residual_P", rp).with("residual_Q", rq).with("depth_in_C", depth);
    Ok(FixedSpectra {
        fixed,
        at_p: spectrum_report(ids[1], &map.jacobian(p), p, 3, &[1, 2])?,
        at_q: spectrum_report(ids[2], &map.jacobian(q), q, 2, &[0, 1, 2, 3])?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Convergence of one orbit to a fixed point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCertificate {
    pub start: Vec4,
    pub direction: Direction,
    pub target: Vec4,
    pub converged: bool,
    pub steps: usize,
    pub final_distance: f64,
    /// First iterate outside `A`, if any.
    pub escape_index: Option<usize>,
    pub failure: Option<String>,
    /// Iterates `x_0, ..., x_steps`.
    pub points: Vec<Vec4>,
}

/// Iterates until within `tol` of `target` (Euclidean), at most `cap`
/// steps, stopping early if the orbit leaves `stay_in`.
pub fn orbit_certificate(
    map: &dyn DiffeoMap4,
    start: Vec4,
    direction: Direction,
    target: Vec4,
    tol: f64,
    cap: usize,
    stay_in: Option<&Region>,
) -> OrbitCertificate {
    let mut points = vec![start];
    let mut x = start;
    let mut cert = OrbitCertificate {
        start,
        direction,
        target,
        converged: false,
        steps: 0,
        final_distance: euclid(start, target),
        escape_index: None,
        failure: None,
        points: Vec::new(),
    };
    for n in 0..=cap {
        cert.steps = n;
        cert.final_distance = euclid(x, target);
        if cert.final_distance <= tol {
            cert.converged = true;
            break;
        }
        if let Some(a) = stay_in {
            if !a.contains(x) {
                cert.escape_index = Some(n);
                cert.failure = Some(format!("orbit left A at step {n}"));
                break;
            }
        }
        if n == cap {
            break;
        }
        let next = match direction {
            Direction::Forward => Ok(map.eval(x)),
            Direction::Backward => map.inverse(x),
        };
        match next {
            Ok(y) if y.iter().all(|c| c.is_finite()) => x = y,
            Ok(y) => {
                cert.failure = Some(format!("non-finite iterate {y:?}"));
                break;
            }
            Err(e) => {
                cert.failure = Some(e.to_string());
                break;
            }
        }
        points.push(x);
    }
    cert.points = points;
    cert
}

/// The three invariant pieces of the cycle, parametrized on open sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathFamily {
    /// `(10 + x, 0, 0, 0)`, `|x| < 0.2`
    L1,
    /// `(0, 5 + y, 0, 0)`, `|y| < 1`
    L2,
    /// `(0, 10, z, w)`, `|z|, |w| < 0.2`
    Varpi,
}

impl PathFamily {
    /// Cell-centred parameter samples, `n` per axis.
    pub fn points(self, n: usize) -> Vec<Vec4> {
        let cell = |r: f64, k: usize| -r + 2.0 * r * (k as f64 + 0.5) / n as f64;
        match self {
            PathFamily::L1 => (0..n).map(|k| [10.0 + cell(0.2, k), 0.0, 0.0, 0.0]).collect(),
            PathFamily::L2 => (0..n).map(|k| [0.0, 5.0 + cell(1.0, k), 0.0, 0.0]).collect(),
            PathFamily::Varpi => {
                (0..n * n).map(|k| [0.0, 10.0, cell(0.2, k / n), cell(0.2, k % n)]).collect()
            }
        }
    }
}

/// Every sampled point of `family` converges to `target` in `direction`,
/// and iterates from index `first` on keep positive sup-norm distance
/// from `D`. Margin: that smallest distance, or minus the leftover
/// distance to the target when an orbit fails to converge.
#[allow(clippy::too_many_arguments)]
pub fn check_path_family(
    id: &str,
    map: &dyn DiffeoMap4,
    scene: &Scene,
    family: PathFamily,
    direction: Direction,
    first: usize,
    target: Vec4,
    cfg: &VerificationConfig,
) -> ConditionReport {
    let starts = family.points(cfg.path_samples);
    let d = &scene.regions().d;
    let a = &scene.regions().a;
    let per: Vec<(f64, Vec4, usize, bool)> = starts
        .par_iter()
        .map(|&s| {
            let c = orbit_certificate(map, s, direction, target, cfg.orbit_tol, cfg.orbit_cap, Some(a));
            let (mut m, mut w) = (f64::INFINITY, s);
            for x in c.points.iter().skip(first) {
                let dist = d.distance(*x);
                if dist < m {
                    m = dist;
                    w = *x;
                }
            }
            if !c.converged {
                return (-c.final_distance.max(f64::MIN_POSITIVE), *c.points.last().unwrap_or(&s), c.steps, false);
            }
            (m, w, c.steps, true)
        })
        .collect();
    let mut worst = (f64::INFINITY, [0.0; 4]);
    let mut max_steps = 0;
    let mut converged = 0;
    for &(m, w, steps, ok) in &per {
        if m < worst.0 {
            worst = (m, w);
        }
        max_steps = max_steps.max(steps);
        converged += ok as usize;
    }
    ConditionReport::from_margin(id, worst.0, worst.1, starts.len() as u64)
        .with("max_steps", max_steps as f64)
        .with("converged", converged as f64)
        .with("min_distance_to_D", worst.0)
}

/// Outcome of [`check_cycle`].
#[derive(Debug, Clone, PartialEq)]
pub struct CycleReport {
    /// `(0,5,0,0)` forward to `Q` and backward to `P`; `(10,0,0,0)` forward
    /// to `P` and backward to `Q`.
    pub connections: [OrbitCertificate; 4],
    pub avoidance: Vec<ConditionReport>,
    pub report: ConditionReport,
}

/// Heterodimensional cycle between `P` and `Q` under `map`: the four orbit
/// certificates plus avoidance of `D` by the three invariant pieces.
pub fn check_cycle(id: &str, map: &dyn DiffeoMap4, scene: &Scene, cfg: &VerificationConfig) -> CycleReport {
    let pts = scene.points();
    let (p, q) = (pts.p, pts.q);
    let a = &scene.regions().a;
    let mid = [0.0, 5.0, 0.0, 0.0];
    let c4 = pts.c4;
    let run = |s, dir, t| orbit_certificate(map, s, dir, t, cfg.orbit_tol, cfg.orbit_cap, Some(a));
    let connections = [
        run(mid, Direction::Forward, q),
        run(mid, Direction::Backward, p),
        run(c4, Direction::Forward, p),
        run(c4, Direction::Backward, q),
    ];
    let avoidance = vec![
        check_path_family("l1_forward", map, scene, PathFamily::L1, Direction::Forward, 1, p, cfg),
        check_path_family("l2_backward", map, scene, PathFamily::L2, Direction::Backward, 0, p, cfg),
        check_path_family("l2_forward", map, scene, PathFamily::L2, Direction::Forward, 0, q, cfg),
        check_path_family("varpi_backward", map, scene, PathFamily::Varpi, Direction::Backward, 1, q, cfg),
    ];
    let names = ["mid_to_Q", "mid_from_P", "C4_to_P", "C4_from_Q"];
    let cap = (cfg.orbit_cap + 1) as f64;
    let mut margin = f64::INFINITY;
    let mut witness = mid;
    let mut notes = Vec::new();
    let mut report = ConditionReport::from_margin(id, 0.0, mid, 0);
    for (c, name) in connections.iter().zip(names) {
        let m = if c.converged { 1.0 - c.steps as f64 / cap } else { -c.final_distance };
        if m < margin {
            margin = m;
            witness = *c.points.last().unwrap_or(&c.start);
        }
        if !c.converged {
            notes.push(format!("{name} did not converge ({})", c.failure.clone().unwrap_or_else(|| "step cap".into())));
        }
        report = report.with(&format!("{name}_steps"), c.steps as f64).with(&format!("{name}_final_distance"), c.final_distance);
    }
    for av in &avoidance {
        let m = av.margin.unwrap_or(-1.0);
        if m < margin {
            margin = m;
            witness = av.witness.unwrap_or(mid);
        }
        if !av.passed() {
            notes.push(format!("{} failed", av.id));
        }
        report = report.with(&format!("{}_margin", av.id), m);
    }
    let samples = connections.iter().map(|c| c.steps as u64 + 1).sum::<u64>() + avoidance.iter().map(|a| a.samples).sum::<u64>();
    report = ConditionReport { margin: Some(margin), witness: Some(witness), samples, ..report };
    report.status = if margin > 0.0 { super::Status::Pass } else { super::Status::Fail };
    if !notes.is_empty() {
        report.note = Some(notes.join("; "));
    }
    CycleReport { connections, avoidance, report }
}

/// Singular-gap surrogate for an `l`-dominated splitting of index `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub window: usize,
    pub index: usize,
    /// `max_i sigma_{k+1}(M_i) / sigma_k(M_i)` over windows `M_i`.
    pub max_ratio: f64,
    pub worst_window: usize,
    pub windows: usize,
}

/// Ratio test on a cocycle given by consecutive Jacobians.
pub fn domination_ratio(jacobians: &[Mat4], window: usize, index: usize) -> Result<DominationReport, VerifyError> {
    if !(1..=3).contains(&index) {
        return Err(VerifyError::BadIndex(index));
    }
    if window == 0 || window > jacobians.len() {
        return Err(VerifyError::WindowTooLong { window, len: jacobians.len() });
    }
    let windows = jacobians.len() - window + 1;
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..windows {
        let m = jacobians[i..i + window].iter().fold(Mat4::identity(), |acc, j| *j * acc);
        let s = singular_values(&m);
        let r = s[index] / s[index - 1];
        if r > best.0 {
            best = (r, i);
        }
    }
    Ok(DominationReport { window, index, max_ratio: best.0, worst_window: best.1, windows })
}

/// [`domination_ratio`] along an orbit of `map`.
pub fn check_finite_domination(map: &dyn DiffeoMap4, orbit: &[Vec4], window: usize, index: usize) -> Result<DominationReport, VerifyError> {
    let jac: Vec<Mat4> = orbit.iter().map(|&x| map.jacobian(x)).collect();
    domination_ratio(&jac, window, index)
}

pub(super) fn domination_reports(model: &Model, cfg: &VerificationConfig) -> Result<Vec<ConditionReport>, VerifyError> {
    let pts = model.scene.points();
    let l = cfg.domination_window;
    let mut out = Vec::new();
    for (id, x, k) in [("domination_P", pts.p, 3), ("domination_Q", pts.q, 2)] {
        let d = check_finite_domination(&model.omega, &vec![x; l], l, k)?;
        out.push(
            ConditionReport { witness: Some(x), ..ConditionReport::evidence(id, d.windows as u64) }
                .with("max_ratio", d.max_ratio)
                .with("window", l as f64)
                .with("index", k as f64)
                .with_note("singular-gap surrogate at the fixed point, not the bundle condition"),
        );
    }
    Ok(out)
}

fn cube_region(model: &Model) -> Region {
    Region::ball([0.0; 4], model.lambda().powi(3) + 1.0)
}

/// (Φ1)-(Φ10) for `Phi = Theta . Psi`.
pub(super) fn phi_suite(
    model: &Model,
    constants: &ExpansionConstants,
    expansion: &ExpansionReport,
    cfg: &VerificationConfig,
) -> Result<Vec<ConditionReport>, VerifyError> {
    let phi = &model.phi;
    let scene = &model.scene;
    let pts = scene.points();
    let (p, q) = (pts.p, pts.q);
    let spectra = check_fixed_spectra(["Φ3", "Φ4", "Φ7"], phi, scene)?;
    let (m, w) = expansion.phi_min();
    let phi10 = ConditionReport::from_margin("Φ10", m - expansion.phi_bound, w, expansion.samples())
        .with("min_conorm3", m)
        .with("c_phi_lambda", expansion.phi_bound)
        .with("c_phi", constants.theta() * constants.c);
    Ok(vec![
        check_support("Φ1", phi, &cube_region(model), cfg.support_samples, cfg.seed),
        check_trapping("Φ2", model, phi, &scene.regions().bp, false, cfg),
        spectra.fixed,
        spectra.at_p,
        check_path_family("Φ5", phi, scene, PathFamily::L1, Direction::Forward, 1, p, cfg),
        check_path_family("Φ6", phi, scene, PathFamily::L2, Direction::Backward, 0, p, cfg),
        spectra.at_q,
        check_path_family("Φ8", phi, scene, PathFamily::L2, Direction::Forward, 0, q, cfg),
        check_path_family("Φ9", phi, scene, PathFamily::Varpi, Direction::Backward, 1, q, cfg),
        phi10,
    ])
}

/// (w1)-(w7) for `Omega`.
pub(super) fn local_suite(
    model: &Model,
    expansion: &ExpansionReport,
    cfg: &VerificationConfig,
) -> Result<Vec<ConditionReport>, VerifyError> {
    let omega = &model.omega;
    let scene = &model.scene;
    let detour = scene.has_upsilon();
    let mut claimed = vec![cube_region(model)];
    if detour {
        claimed.push(scene.regions().d.clone());
    }
    let spectra = check_fixed_spectra(["w3", "w5", "w6"], omega, scene)?;
    let cycle = check_cycle("w4", omega, scene, cfg);
    let (m, w) = expansion.omega_min();
    let k = 1.0;
    let dis = expansion.disagreement.unwrap_or(f64::NAN);
    let mut w7 = ConditionReport::from_margin("w7", m - k, w, expansion.samples())
        .with("direct_min", m)
        .with("coarse_min", expansion.coarse.omega.value)
        .with("K", k)
        .with("factorized_bound", expansion.factorized_bound)
        .with("lambda", expansion.lambda);
    if let Some(rf) = &expansion.refined {
        w7 = w7.with("refined_min", rf.omega.value).with("relative_disagreement", dis);
    }
    if w7.passed() && !(dis <= cfg.refine_tol) {
        w7 = w7.fail_because("grid refinements disagree");
    }
    Ok(vec![
        check_support("w1", omega, &Region::union(claimed), cfg.support_samples, cfg.seed),
        check_trapping("w2", model, omega, &scene.regions().b, detour, cfg),
        spectra.fixed,
        cycle.report,
        spectra.at_p,
        spectra.at_q,
        w7,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps4d::Identity;

    fn model() -> Model {
        Model::build(&Scene::default_with_lambda(100.0).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_cocycle_ratio_is_the_eigen_ratio() {
        let d = Mat4::diag([4.0, 1.0, 1.0, 1.0]);
        let r = domination_ratio(&[d; 5], 2, 1).unwrap();
        assert_eq!(r.windows, 4);
        assert!((r.max_ratio - 1.0 / 16.0).abs() < 1e-15);
        assert!((domination_ratio(&[d], 1, 1).unwrap().max_ratio - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rotation_cocycle_is_not_dominated() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        let r = Mat4([[c, -s, 0.0, 0.0], [s, c, 0.0, 0.0], [0.0, 0.0, c, -s], [0.0, 0.0, s, c]]);
        let d = domination_ratio(&[r; 6], 3, 2).unwrap();
        assert!((d.max_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn domination_rejects_bad_arguments() {
        let m = [Mat4::identity(); 2];
        assert!(matches!(domination_ratio(&m, 3, 1), Err(VerifyError::WindowTooLong { .. })));
        assert!(matches!(domination_ratio(&m, 1, 4), Err(VerifyError::BadIndex(4))));
    }

    #[test]
    fn identity_has_no_hyperbolic_fixed_points() {
        let scene = Scene::default_with_lambda(100.0).unwrap();
        let s = check_fixed_spectra(["a", "b", "c"], &Identity, &scene).unwrap();
        assert!(s.fixed.passed());
        assert!(!s.at_p.passed());
        assert!(!s.at_q.passed());
    }

    #[test]
    fn omega_spectra_pass_at_both_fixed_points() {
        let m = model();
        let s = check_fixed_spectra(["w3", "w5", "w6"], &m.omega, &m.scene).unwrap();
        assert!(s.fixed.passed() && s.at_p.passed() && s.at_q.passed());
        assert_eq!(s.at_p.measured["index"], 3.0);
        assert_eq!(s.at_q.measured["non_real"], 4.0);
    }

    #[test]
    fn support_check_catches_an_undersized_claim() {
        let m = model();
        let pts = m.scene.points();
        let r = m.scene.radii().theta.outer;
        let honest = Region::union(vec![Region::ball(pts.p, r), Region::ball(pts.q, r)]);
        assert!(check_support("t", m.theta.as_ref(), &honest, 2000, 3).passed());
        let tight = Region::union(vec![Region::ball(pts.p, r / 4.0), Region::ball(pts.q, r / 4.0)]);
        let bad = check_support("t", m.theta.as_ref(), &tight, 2000, 3);
        assert!(!bad.passed());
        assert!(bad.witness.is_some());
        assert!(check_support("id", &Identity, &Region::ball([0.0; 4], 1.0), 500, 0).passed());
    }

    #[test]
    fn backward_orbit_of_c4_shrinks_by_lambda_inside_the_q_plane() {
        let m = model();
        let pts = m.scene.points();
        let c = orbit_certificate(&m.omega, pts.c4, Direction::Backward, pts.q, 1e-8, 500, None);
        assert!(c.converged, "{c:?}");
        for (n, x) in c.points.iter().enumerate().skip(1) {
            let r = x[2].hypot(x[3]);
            let want = 5.0 / 100f64.powi(n as i32);
            assert!(x[0].abs() < 1e-8 && (x[1] - 10.0).abs() < 1e-8, "step {n}: {x:?}");
            assert!((r - want).abs() <= 1e-6 * want, "step {n}: {r} vs {want}");
        }
    }

    #[test]
    fn forward_orbit_of_the_midpoint_reaches_q() {
        let m = model();
        let c = orbit_certificate(&m.omega, [0.0, 5.0, 0.0, 0.0], Direction::Forward, m.scene.points().q, 1e-8, 500, None);
        assert!(c.converged);
        let q = m.scene.points().q;
        let d: Vec<f64> = c.points.iter().map(|x| sup_dist(*x, q)).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }
}
