//! Diffeomorphisms of R^4 with analytic Jacobians and inverses: the rotation
//! blend `Theta`, the blended product map `Psi`, the box translation `chi`,
//! and their compositions `Upsilon`, `Phi = Theta . Psi`, `Omega = Upsilon . Phi`.

mod chi;
mod psi;
mod theta;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::extalg4::{Mat4, Vec4};
use crate::smooth1d::SmoothError;

pub use chi::{ChiMap, Kappa, LegFrame, CHI_MARGIN};
pub use psi::PsiMap;
pub use theta::{ThetaMap, ThetaRadii};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("{map}: inverse failed at {y:?}: {reason}")]
    Inverse { map: String, y: Vec4, reason: String },
    #[error("invalid box translation: {0}")]
    InvalidChi(String),
    #[error(transparent)]
    Smooth(#[from] SmoothError),
}

/// Union of closed axis-aligned boxes `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Support {
    pub boxes: Vec<[[f64; 2]; 4]>,
}

impl Support {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn cube(center: Vec4, radius: f64) -> Self {
        Self { boxes: vec![center.map(|c| [c - radius, c + radius])] }
    }

    pub fn contains(&self, x: Vec4) -> bool {
        self.boxes.iter().any(|b| (0..4).all(|i| b[i][0] <= x[i] && x[i] <= b[i][1]))
    }

    pub fn union(mut self, other: &Support) -> Self {
        self.boxes.extend(other.boxes.iter().copied());
        self
    }
}

/// A diffeomorphism of R^4 that is the identity outside [`DiffeoMap4::support`].
pub trait DiffeoMap4: Send + Sync + fmt::Debug {
    fn eval(&self, x: Vec4) -> Vec4;
    fn jacobian(&self, x: Vec4) -> Mat4;
    fn inverse(&self, y: Vec4) -> Result<Vec4, MapError>;
    fn support(&self) -> Support;
    fn tag(&self) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl DiffeoMap4 for Identity {
    fn eval(&self, x: Vec4) -> Vec4 {
        x
    }
    fn jacobian(&self, _x: Vec4) -> Mat4 {
        Mat4::identity()
    }
    fn inverse(&self, y: Vec4) -> Result<Vec4, MapError> {
        Ok(y)
    }
    fn support(&self) -> Support {
        Support::empty()
    }
    fn tag(&self) -> String {
        "id".into()
    }
}

/// `maps[n-1] . ... . maps[0]`: the first factor is applied first.
#[derive(Debug, Clone)]
pub struct Composite {
    tag: String,
    maps: Vec<Arc<dyn DiffeoMap4>>,
}

impl Composite {
    pub fn new(tag: impl Into<String>, maps: Vec<Arc<dyn DiffeoMap4>>) -> Self {
        Self { tag: tag.into(), maps }
    }

    pub fn factors(&self) -> &[Arc<dyn DiffeoMap4>] {
        &self.maps
    }

    /// Every intermediate point: `out[0] = x`, `out[k+1] = maps[k](out[k])`.
    pub fn trajectory(&self, x: Vec4) -> Vec<Vec4> {
        let mut out = Vec::with_capacity(self.maps.len() + 1);
        out.push(x);
        for m in &self.maps {
            let last = *out.last().expect("non-empty");
            out.push(m.eval(last));
        }
        out
    }

    /// Value and Jacobian in one pass along the evaluation chain.
    pub fn eval_with_jacobian(&self, x: Vec4) -> (Vec4, Mat4) {
        let mut p = x;
        let mut j = Mat4::identity();
        for m in &self.maps {
            j = m.jacobian(p) * j;
            p = m.eval(p);
        }
        (p, j)
    }
}

impl DiffeoMap4 for Composite {
    fn eval(&self, x: Vec4) -> Vec4 {
        self.maps.iter().fold(x, |p, m| m.eval(p))
    }

    fn jacobian(&self, x: Vec4) -> Mat4 {
        self.eval_with_jacobian(x).1
    }

    fn inverse(&self, y: Vec4) -> Result<Vec4, MapError> {
        self.maps.iter().rev().try_fold(y, |p, m| m.inverse(p))
    }

    fn support(&self) -> Support {
        self.maps.iter().fold(Support::empty(), |s, m| s.union(&m.support()))
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }
}

pub(crate) fn sup_dist(a: Vec4, b: Vec4) -> f64 {
    (0..4).map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
}

/// Central finite-difference Jacobian with step `h`.
pub fn finite_difference_jacobian(map: &dyn DiffeoMap4, x: Vec4, h: f64) -> Mat4 {
    let mut j = Mat4::ZERO;
    for col in 0..4 {
        let mut xp = x;
        let mut xm = x;
        xp[col] += h;
        xm[col] -= h;
        let (fp, fm) = (map.eval(xp), map.eval(xm));
        for row in 0..4 {
            j.0[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// `Upsilon = chi3 . chi2 . chi1`.
pub fn build_upsilon(chis: [ChiMap; 3]) -> Composite {
    let maps: Vec<Arc<dyn DiffeoMap4>> = chis.into_iter().map(|c| Arc::new(c) as Arc<dyn DiffeoMap4>).collect();
    Composite::new("upsilon", maps)
}

/// `Phi = Theta . Psi`.
pub fn build_phi(psi: Arc<PsiMap>, theta: Arc<ThetaMap>) -> Composite {
    Composite::new("phi", vec![psi, theta])
}

/// `Omega = Upsilon . Theta . Psi`, or `Phi` alone when no detour is given.
pub fn build_omega(psi: Arc<PsiMap>, theta: Arc<ThetaMap>, upsilon: Option<Arc<Composite>>) -> Composite {
    let mut maps: Vec<Arc<dyn DiffeoMap4>> = vec![psi, theta];
    let tag = match upsilon {
        Some(u) => {
            maps.push(u);
            "omega"
        }
        None => "omega(no detour)",
    };
    Composite::new(tag, maps)
}
