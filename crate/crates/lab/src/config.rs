//! Experiment configuration and cochain descriptors.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use bcoh_core::cochains::{qm_to_two_cocycle, Cochain, ConstantCochain};
use bcoh_core::eightmodel::{GeometryParams, ModelGeometry, TransformationElement};
use bcoh_core::hypervol::{loxodromic_pair, volume_cocycle, ActionParams, KleinPoint, DEFAULT_VOLUME_TOL};
use bcoh_core::induce::Integrator;
use bcoh_core::{Quasimorphism, Word};
use serde::{Deserialize, Serialize};

use crate::LabError;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_WORD_CAP: usize = 16;
pub const DEFAULT_POWERS: u32 = 4;

/// Geometry given inline or as a path to a JSON file of [`GeometryParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeometrySource {
    Inline(GeometryParams),
    File(PathBuf),
}

impl Default for GeometrySource {
    fn default() -> Self {
        GeometrySource::Inline(GeometryParams::default())
    }
}

impl GeometrySource {
    /// Relative paths are taken from `base`.
    pub fn load(&self, base: Option<&Path>) -> Result<GeometryParams, LabError> {
        match self {
            GeometrySource::Inline(p) => Ok(*p),
            GeometrySource::File(path) => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                read_json(&path)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CochainDescriptor {
    /// The 2-cocycle of the homogenized Brooks counting quasimorphism.
    Brooks2 { pattern: Word },
    /// The volume cocycle of a loxodromic pair acting on H³.
    Vol3 {
        #[serde(default)]
        rho: ActionParams,
        #[serde(default = "default_volume_tol")]
        tol: f64,
    },
    Zero { degree: usize },
}

fn default_volume_tol() -> f64 {
    DEFAULT_VOLUME_TOL
}

impl CochainDescriptor {
    pub fn build(&self) -> Result<Arc<dyn Cochain>, LabError> {
        match self {
            CochainDescriptor::Brooks2 { pattern } => {
                let q = Quasimorphism::brooks_homogeneous(pattern).map_err(|e| LabError::Config(e.to_string()))?;
                Ok(Arc::new(qm_to_two_cocycle(&q).map_err(|e| LabError::Config(e.to_string()))?))
            }
            CochainDescriptor::Vol3 { rho, tol } => {
                let action = loxodromic_pair(rho.translation_length, rho.rotation_angle, rho.axis_separation)
                    .map_err(|e| LabError::Config(e.to_string()))?;
                let c = volume_cocycle(Arc::new(action), KleinPoint::origin(), *tol).map_err(|e| LabError::Config(e.to_string()))?;
                Ok(Arc::new(c))
            }
            CochainDescriptor::Zero { degree } => Ok(Arc::new(ConstantCochain::zero(*degree))),
        }
    }

    /// The quasimorphism behind a degree-2 descriptor; `zero` of degree 1 or 2 gives the zero map.
    pub fn quasimorphism(&self) -> Result<Quasimorphism, LabError> {
        match self {
            CochainDescriptor::Brooks2 { pattern } => Quasimorphism::brooks_homogeneous(pattern).map_err(|e| LabError::Config(e.to_string())),
            CochainDescriptor::Zero { degree: 1 | 2 } => Ok(Quasimorphism::custom(|_| 0.0, Some(0.0), true)),
            other => Err(LabError::Config(format!("{} has no underlying quasimorphism", other.kind()))),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CochainDescriptor::Brooks2 { .. } => "brooks2",
            CochainDescriptor::Vol3 { .. } => "vol3",
            CochainDescriptor::Zero { .. } => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub geometry: GeometrySource,
    pub cochain: CochainDescriptor,
    #[serde(default)]
    pub words: Vec<TransformationElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuple: Option<Vec<TransformationElement>>,
    #[serde(default)]
    pub epsilon_ladder: Vec<f64>,
    pub integrator: Integrator,
    #[serde(default = "default_powers")]
    pub powers: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default = "default_word_cap")]
    pub max_word_length: usize,
}

fn default_powers() -> u32 {
    DEFAULT_POWERS
}

fn default_word_cap() -> usize {
    DEFAULT_WORD_CAP
}

impl ExperimentConfig {
    pub fn new(cochain: CochainDescriptor, integrator: Integrator) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            geometry: GeometrySource::default(),
            cochain,
            words: Vec::new(),
            tuple: None,
            epsilon_ladder: Vec::new(),
            integrator,
            powers: DEFAULT_POWERS,
            output: None,
            max_word_length: DEFAULT_WORD_CAP,
        }
    }

    /// Reads, validates and inlines the geometry.
    pub fn load(path: &Path) -> Result<ExperimentConfig, LabError> {
        let cfg: ExperimentConfig = read_json(path)?;
        cfg.validate()?;
        cfg.resolved(path.parent())
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(LabError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for (i, &e) in self.epsilon_ladder.iter().enumerate() {
            if !(e > 0.0 && e < 1.0) {
                return Err(LabError::Config(format!("epsilon {e} outside (0, 1)")));
            }
            if i > 0 && e >= self.epsilon_ladder[i - 1] {
                return Err(LabError::Config("epsilon ladder must be strictly decreasing".into()));
            }
        }
        let elements = self.words.iter().chain(self.tuple.iter().flatten());
        for g in elements {
            if g.len() > self.max_word_length {
                return Err(LabError::Config(format!("word {g} longer than the cap {}", self.max_word_length)));
            }
        }
        if self.integrator.mc_samples == 0 {
            return Err(LabError::Config("integrator needs at least one sample".into()));
        }
        Ok(())
    }

    /// A copy with the geometry inlined, so the config is self-contained.
    pub fn resolved(&self, base: Option<&Path>) -> Result<ExperimentConfig, LabError> {
        Ok(ExperimentConfig {
            geometry: GeometrySource::Inline(self.geometry.load(base)?),
            ..self.clone()
        })
    }

    pub fn geometry_params(&self) -> Result<GeometryParams, LabError> {
        self.geometry.load(None)
    }

    pub fn model(&self) -> Result<ModelGeometry, LabError> {
        Ok(ModelGeometry::new(self.geometry_params()?)?)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))
}
