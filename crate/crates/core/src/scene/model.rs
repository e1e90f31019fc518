//! The maps of a scene, built once and shared.

use std::sync::Arc;

use thiserror::Error;

use super::{Scene, SolvedCoefficients};
use crate::maps4d::{build_omega, build_phi, build_upsilon, ChiMap, Composite, MapError, PsiMap, ThetaMap};
use crate::smooth1d::{build_f, build_g, build_h, AntiderivativeMap, FlowMap1D, ScalarMap1D, SmoothError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Smooth(#[from] SmoothError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone)]
pub struct Model {
    pub scene: Scene,
    pub f: Arc<FlowMap1D>,
    pub g: Arc<FlowMap1D>,
    pub h: Arc<AntiderivativeMap>,
    pub theta: Arc<ThetaMap>,
    pub psi: Arc<PsiMap>,
    pub chis: Vec<ChiMap>,
    /// Always built, so the detour can be inspected even when `Omega` omits it.
    pub upsilon: Arc<Composite>,
    pub phi: Composite,
    pub omega: Composite,
}

impl Model {
    pub fn build(scene: &Scene) -> Result<Self, ModelError> {
        let lambda = scene.lambda();
        let f = Arc::new(build_f(lambda)?);
        let g = Arc::new(build_g(lambda)?);
        let h = Arc::new(build_h(lambda)?);
        let pts = scene.points();
        let theta = Arc::new(ThetaMap::new(pts.p, pts.q, scene.radii().theta));
        let psi = Arc::new(PsiMap::new(
            f.clone() as Arc<dyn ScalarMap1D>,
            g.clone() as Arc<dyn ScalarMap1D>,
            h.clone() as Arc<dyn ScalarMap1D>,
            lambda.powi(3),
        ));
        let cs = pts.detour();
        let rs = scene.radii().chi;
        let chis = [0, 1, 2]
            .into_iter()
            .map(|i| ChiMap::new(cs[i], cs[i + 1], rs[i][0], rs[i][1], rs[i][2]))
            .collect::<Result<Vec<_>, _>>()?;
        let upsilon = Arc::new(build_upsilon([chis[0].clone(), chis[1].clone(), chis[2].clone()]));
        let phi = build_phi(psi.clone(), theta.clone());
        let omega = build_omega(psi.clone(), theta.clone(), scene.has_upsilon().then(|| upsilon.clone()));
        Ok(Self { scene: scene.clone(), f, g, h, theta, psi, chis, upsilon, phi, omega })
    }

    pub fn lambda(&self) -> f64 {
        self.scene.lambda()
    }

    pub fn solved_coefficients(&self) -> SolvedCoefficients {
        let chi = [0, 1, 2].map(|i| [self.chis[i].kappa().alpha(), self.chis[i].kappa().beta()]);
        SolvedCoefficients { alpha0: self.h.alpha0(), beta0: self.h.beta0(), chi }
    }
}
