//! JSON scene files.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Points, Radii, RegionParams, Scene, SceneError, SceneParams};
use crate::smooth1d::SolvedCoefficient;

pub const SCHEMA_VERSION: u32 = 1;

/// A fixed `lambda` or the keyword `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    Fixed(f64),
    Keyword(AutoKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoKeyword {
    #[serde(rename = "auto")]
    Auto,
}

impl Default for LambdaSpec {
    fn default() -> Self {
        LambdaSpec::Fixed(100.0)
    }
}

impl LambdaSpec {
    pub const AUTO: LambdaSpec = LambdaSpec::Keyword(AutoKeyword::Auto);

    pub fn fixed(&self) -> Option<f64> {
        match self {
            LambdaSpec::Fixed(l) => Some(*l),
            LambdaSpec::Keyword(_) => None,
        }
    }
}

/// Coefficients fixed by integral constraints during construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolvedCoefficients {
    pub alpha0: SolvedCoefficient,
    pub beta0: SolvedCoefficient,
    /// `(alpha1, beta1)` of each box translation profile
    pub chi: [[SolvedCoefficient; 2]; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneFile {
    pub schema_version: u32,
    pub lambda: LambdaSpec,
    pub points: Points,
    pub radii: Radii,
    pub regions: RegionParams,
    pub upsilon: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solved_coefficients: Option<SolvedCoefficients>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    /// Hash of the run that wrote this file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl Default for SceneFile {
    fn default() -> Self {
        let p = SceneParams::default();
        Self {
            schema_version: SCHEMA_VERSION,
            lambda: LambdaSpec::Fixed(p.lambda),
            points: p.points,
            radii: p.radii,
            regions: p.regions,
            upsilon: p.upsilon,
            solved_coefficients: None,
            lambda0: None,
            k: None,
            config_hash: None,
        }
    }
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: SceneFile = serde_path_to_error::deserialize(de)
            .map_err(|e| SceneError::Parse { field: e.path().to_string(), message: e.inner().to_string() })?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(SceneError::SchemaVersion { found: file.schema_version });
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene file serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), SceneError> {
        fs::write(path, self.to_json() + "\n").map_err(|source| SceneError::Io { path: path.display().to_string(), source })
    }

    /// Parameters with `lambda` resolved; fails on `"auto"` without an override.
    pub fn params(&self, lambda_override: Option<f64>) -> Result<SceneParams, SceneError> {
        let lambda = lambda_override.or(self.lambda.fixed()).ok_or(SceneError::UnresolvedLambda)?;
        Ok(SceneParams { lambda, points: self.points, radii: self.radii, regions: self.regions, upsilon: self.upsilon })
    }

    pub fn from_scene(scene: &Scene, solved: Option<SolvedCoefficients>) -> Self {
        let p = scene.params();
        Self {
            schema_version: SCHEMA_VERSION,
            lambda: LambdaSpec::Fixed(p.lambda),
            points: p.points,
            radii: p.radii,
            regions: p.regions,
            upsilon: p.upsilon,
            solved_coefficients: solved,
            lambda0: scene.tuning().map(|t| t.0),
            k: scene.tuning().map(|t| t.1),
            config_hash: None,
        }
    }
}
