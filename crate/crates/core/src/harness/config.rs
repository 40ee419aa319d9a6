use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::assembly::CoefficientSpec;
use crate::error::{Error, Result};
use crate::grid::Rect;
use crate::rangefinder::TrainingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestCase {
    PureDiffusion,
    FullCdrParallel,
    FullCdrLattice,
    Custom,
}

/// A mesh width given either as a number or as a ratio string such as `"1/30"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum MeshWidth {
    Value(f64),
    Ratio(String),
}

impl MeshWidth {
    pub fn value(&self) -> Result<f64> {
        let h = match self {
            MeshWidth::Value(v) => *v,
            MeshWidth::Ratio(s) => {
                let parse = |t: &str| {
                    t.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad mesh width {s:?}")))
                };
                match s.split_once('/') {
                    Some((a, b)) => parse(a)? / parse(b)?,
                    None => parse(s)?,
                }
            }
        };
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidConfig(format!("mesh width must be positive, got {h}")));
        }
        Ok(h)
    }
}

impl From<f64> for MeshWidth {
    fn from(h: f64) -> Self {
        MeshWidth::Value(h)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    /// `[x0, y0, x1, y1]`.
    #[serde(default = "default_interior")]
    pub interior: [f64; 4],
    pub delta: f64,
    pub h: MeshWidth,
}

fn default_interior() -> [f64; 4] {
    [0.0, 0.0, 1.0, 1.0]
}

impl GeometryConfig {
    pub fn interior_rect(&self) -> Result<Rect> {
        let [x0, y0, x1, y1] = self.interior;
        Rect::new(x0, y0, x1, y1)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub tol: f64,
    pub n_test: usize,
    pub eps_fail: f64,
    pub max_basis: usize,
    pub c_est: Option<f64>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self { tol: t.tol, n_test: t.n_test, eps_fail: t.eps_fail, max_basis: t.max_basis, c_est: t.c_est }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudySection {
    /// Used for any delta that does not align with `geometry.h`.
    pub fallback_h: MeshWidth,
}

impl Default for StudySection {
    fn default() -> Self {
        Self { fallback_h: MeshWidth::Value(1.0 / 40.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub test_case: TestCase,
    pub geometry: GeometryConfig,
    /// Required for `custom`, rejected otherwise.
    pub coefficients: Option<CoefficientSpec>,
    /// Channel-to-background diffusion ratio for the channel cases.
    #[serde(default = "default_contrast")]
    pub contrast: f64,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default = "default_n_eval")]
    pub n_eval: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub output_prefix: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Compute the SVD-optimal spaces when the boundary dimension permits.
    #[serde(default = "default_true")]
    pub oracle: bool,
    #[serde(default)]
    pub study: StudySection,
}

fn default_contrast() -> f64 {
    100.0
}
fn default_n_eval() -> usize {
    20
}
fn default_seed() -> u64 {
    1
}
fn default_out_dir() -> PathBuf {
    PathBuf::from(".")
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// A configuration with defaults everywhere except the essentials.
    pub fn new(test_case: TestCase, delta: f64, h: f64, output_prefix: &str) -> Self {
        Self {
            test_case,
            geometry: GeometryConfig { interior: default_interior(), delta, h: h.into() },
            coefficients: None,
            contrast: default_contrast(),
            training: TrainingSection::default(),
            n_eval: default_n_eval(),
            seed: default_seed(),
            output_prefix: output_prefix.to_string(),
            out_dir: default_out_dir(),
            oracle: true,
            study: StudySection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            tol: self.training.tol,
            n_test: self.training.n_test,
            eps_fail: self.training.eps_fail,
            max_basis: self.training.max_basis,
            seed: self.seed,
            c_est: self.training.c_est,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.interior_rect()?;
        self.geometry.h.value()?;
        self.study.fallback_h.value()?;
        if !(self.geometry.delta > 0.0) {
            return Err(Error::NonPositiveMargin(self.geometry.delta));
        }
        match (self.test_case, &self.coefficients) {
            (TestCase::Custom, None) => {
                return Err(Error::InvalidConfig("custom test case needs a [coefficients] table".into()))
            }
            (TestCase::Custom, Some(_)) | (_, None) => {}
            (_, Some(_)) => {
                return Err(Error::InvalidConfig("[coefficients] is only allowed with test_case = \"custom\"".into()))
            }
        }
        if !(self.contrast > 0.0) || !self.contrast.is_finite() {
            return Err(Error::InvalidConfig(format!("contrast must be positive, got {}", self.contrast)));
        }
        if self.output_prefix.is_empty() || self.output_prefix.contains(['/', '\\']) {
            return Err(Error::InvalidConfig(format!(
                "output_prefix must be a plain file stem, got {:?}",
                self.output_prefix
            )));
        }
        self.training_config().validate()
    }
}
