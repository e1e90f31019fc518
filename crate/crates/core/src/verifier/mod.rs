//! Numerical certification of the construction: every lemma-level
//! property of the scalar maps and of `Theta`, `Psi`, `Upsilon`, the
//! properties of `Phi`, and the final conditions (w1)-(w7) for `Omega`.
//!
//! Each condition becomes a [`ConditionReport`] with a signed margin
//! (positive means satisfied) and, when it fails, a witness point. Scans
//! are deterministic grids or seeded low-discrepancy sets reduced with
//! order-independent minima, so a report is reproducible bit for bit.

mod checks;
mod expansion;
mod lemmas;
pub mod sampling;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::extalg4::{ExtAlgError, Vec4};
use crate::maps4d::MapError;
use crate::scene::{Model, ModelError, Scene, SceneError, SceneParams};

pub use checks::{
    check_cycle, check_finite_domination, check_fixed_spectra, check_path_family, check_support, check_trapping,
    domination_ratio, orbit_certificate, CycleReport, Direction, DominationReport, FixedSpectra, OrbitCertificate,
    PathFamily,
};
pub use expansion::{
    auto_tune_lambda, check_expansion, conorm3, expansion_constants, ExpansionConstants, ExpansionReport, GridMinimum,
    Minimum, TuneStep, TuningReport,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Knobs of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerificationConfig {
    /// Fixed `lambda`, or `None` to tune it.
    pub lambda: Option<f64>,
    pub seed: u64,
    /// Points per axis of the coarse 4D expansion grids; the refinement doubles it.
    pub grid: usize,
    /// Nodes per axis on each boundary facet of `A` and `B`.
    pub boundary_grid: usize,
    /// Exterior samples per support check.
    pub support_samples: usize,
    /// Parameter samples per axis on the segments and the square of the cycle.
    pub path_samples: usize,
    /// Random points for the plateau and pointwise identity checks.
    pub point_samples: usize,
    pub orbit_tol: f64,
    pub orbit_cap: usize,
    /// Largest relative disagreement tolerated between grid refinements.
    pub refine_tol: f64,
    pub tune_start: f64,
    pub tune_cap: f64,
    /// Window of the domination diagnostic.
    pub domination_window: usize,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            seed: 0,
            grid: 20,
            boundary_grid: 12,
            support_samples: 4096,
            path_samples: 41,
            point_samples: 1000,
            orbit_tol: 1e-8,
            orbit_cap: 500,
            refine_tol: 0.05,
            tune_start: 100.0,
            tune_cap: 1e4,
            domination_window: 1,
        }
    }
}

impl VerificationConfig {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let bad = |what: &str| Err(VerifyError::InvalidConfig(what.to_string()));
        if self.grid < 2 || self.boundary_grid < 2 || self.path_samples < 2 {
            return bad("grid resolutions must be at least 2");
        }
        if self.support_samples == 0 || self.point_samples == 0 || self.orbit_cap == 0 || self.domination_window == 0 {
            return bad("sample counts, orbit cap and window must be positive");
        }
        let positive = [self.orbit_tol, self.refine_tol, self.tune_start, self.tune_cap];
        if positive.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("tolerances and tuning bounds must be positive and finite");
        }
        if self.tune_cap < self.tune_start {
            return bad("tune_cap is below tune_start");
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() {
                return bad("lambda must be finite");
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON of this config and the scene parameters.
    pub fn hash_with(&self, params: &SceneParams) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            config: &'a VerificationConfig,
            scene: &'a SceneParams,
        }
        let text = serde_json::to_string(&Hashed { config: self, scene: params }).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Diagnostic only; never affects the verdict.
    Evidence,
}

/// Outcome of one condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub id: String,
    pub status: Status,
    /// Positive when satisfied.
    pub margin: Option<f64>,
    /// Worst point found; always present on failure.
    pub witness: Option<Vec4>,
    pub samples: u64,
    pub measured: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl ConditionReport {
    /// Pass iff `margin > 0`.
    pub fn from_margin(id: &str, margin: f64, witness: Vec4, samples: u64) -> Self {
        let status = if margin > 0.0 { Status::Pass } else { Status::Fail };
        Self {
            id: id.to_string(),
            status,
            margin: Some(margin),
            witness: Some(witness),
            samples,
            measured: BTreeMap::new(),
            note: None,
        }
    }

    pub fn evidence(id: &str, samples: u64) -> Self {
        Self {
            id: id.to_string(),
            status: Status::Evidence,
            margin: None,
            witness: None,
            samples,
            measured: BTreeMap::new(),
            note: None,
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.measured.insert(key.to_string(), value);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// Same content under another id.
    pub fn renamed(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }

    /// Forces failure, keeping the margin non-positive.
    pub fn fail_because(mut self, note: impl Into<String>) -> Self {
        self.status = Status::Fail;
        self.margin = Some(self.margin.map_or(-1.0, |m| m.min(0.0)));
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Full result of [`run_all`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config_hash: String,
    pub lambda: f64,
    pub tuning: Option<TuningReport>,
    pub conditions: Vec<ConditionReport>,
    pub passed: bool,
}

impl Report {
    pub fn get(&self, id: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.id == id)
    }

    /// Ids of failed conditions, in report order.
    pub fn failures(&self) -> Vec<&str> {
        self.conditions.iter().filter(|c| c.status == Status::Fail).map(|c| c.id.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// One line per condition, then a verdict.
    pub fn summary(&self) -> String {
        let mut out = format!("config_hash {}\nlambda {}\n", self.config_hash, self.lambda);
        for c in &self.conditions {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Evidence => "INFO",
            };
            let margin = c.margin.map_or("-".to_string(), |m| format!("{m:.6e}"));
            out.push_str(&format!("{status:4} {:<14} margin {margin}", c.id));
            if let Some(n) = &c.note {
                out.push_str(&format!("  ({n})"));
            }
            out.push('\n');
        }
        let failed = self.failures();
        if failed.is_empty() {
            out.push_str("verdict: all conditions hold\n");
        } else {
            out.push_str(&format!("verdict: {} failed: {}\n", failed.len(), failed.join(", ")));
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("invalid verification config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Eigen(#[from] ExtAlgError),
    #[error("window {window} exceeds the {len} available Jacobians")]
    WindowTooLong { window: usize, len: usize },
    #[error("splitting index {0} is outside 1..=3")]
    BadIndex(usize),
}

/// Runs every check on `scene`, tuning `lambda` first when the config asks
/// for it.
pub fn run_all(scene: &Scene, config: &VerificationConfig) -> Result<Report, VerifyError> {
    config.validate()?;
    let config_hash = config.hash_with(scene.params());
    let (scene, tuning) = match config.lambda {
        Some(l) if l == scene.lambda() => (scene.clone(), None),
        Some(l) => (scene.at_lambda(l)?, None),
        None => {
            let t = auto_tune_lambda(scene, config)?;
            let s = scene.at_lambda(t.lambda)?;
            let s = match t.k {
                Some(k) => s.with_tuning(t.lambda, k),
                None => s,
            };
            (s, Some(t))
        }
    };
    let model = Model::build(&scene)?;
    let constants = match &tuning {
        Some(t) => t.constants.clone(),
        None => expansion_constants(&model, config),
    };
    let expansion = check_expansion(&model, &constants, config, true);
    let mut conditions = lemmas::scalar_suite(&model, config);
    conditions.extend(lemmas::theta_suite(&model, config));
    conditions.extend(lemmas::psi_suite(&model, config));
    conditions.extend(lemmas::upsilon_suite(&model, config));
    conditions.extend(checks::phi_suite(&model, &constants, &expansion, config)?);
    conditions.extend(checks::local_suite(&model, &expansion, config)?);
    conditions.extend(lemmas::coefficient_reports(&model));
    conditions.extend(checks::domination_reports(&model, config)?);
    conditions.extend(constants.reports(config));
    let passed = conditions.iter().all(ConditionReport::passed);
    Ok(Report { schema_version: REPORT_SCHEMA_VERSION, config_hash, lambda: scene.lambda(), tuning, conditions, passed })
}

/// Every condition id the full report carries, in order.
pub const CONDITION_IDS: [&str; 54] = [
    "F1", "F2", "F3", "F4", "F5", "G1", "G2", "G3", "G4", "G5", "G6", "G7", "G8", "H1", "H2", "H3", "H4", "H5",
    "Θ1", "Θ2", "Θ3", "Θ4", "Θ5", "Θ6", "Θ7", "Θ8", "Θ9", "Ψ1", "Ψ2", "Υ1", "Υ2", "Φ1", "Φ2", "Φ3", "Φ4", "Φ5",
    "Φ6", "Φ7", "Φ8", "Φ9", "Φ10", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "coefficients", "domination_P",
    "domination_Q", "c_theta", "c_upsilon", "scalar_rates",
];
