//! Experiment configuration (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::moduli::{PiecewiseLinear, RadiusRule, UniformEmbeddingModuli};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub pipeline: Option<PipelineSection>,
    #[serde(default)]
    pub graphs: GraphsSection,
    pub space: Option<SpaceSection>,
    pub moduli: Option<ModuliSection>,
    pub embedding: Option<EmbeddingSection>,
    pub sandwich: Option<SandwichSection>,
    pub delta_survey: Option<DeltaSurveySection>,
    #[serde(default)]
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Spectral,
    Sandwich,
    Obstruction,
    DeltaSurvey,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub name: String,
    pub seed: u64,
    pub stages: Vec<Stage>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphsSection {
    /// `K<n>`, `C<n>` or `P<n>`.
    #[serde(default)]
    pub named: Vec<String>,
    /// Graph files, relative to the config file.
    #[serde(default)]
    pub files: Vec<PathBuf>,
    #[serde(default)]
    pub random_regular: Vec<RegularFamily>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularFamily {
    pub sizes: Vec<usize>,
    pub degree: usize,
    #[serde(default = "one")]
    pub count: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSection {
    /// Target of the obstruction maps.
    pub target: String,
    #[serde(default = "default_level")]
    pub level: usize,
}

fn default_level() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliSection {
    pub rho1: PiecewiseLinear,
    pub rho2: PiecewiseLinear,
    /// Family bound on the nonlinear gap; defaults to the smallest computed quotient.
    pub family_lambda: Option<f64>,
    #[serde(default = "both_rules")]
    pub rules: Vec<RadiusRule>,
}

impl ModuliSection {
    pub fn moduli(&self) -> Result<UniformEmbeddingModuli> {
        UniformEmbeddingModuli::new(self.rho1.clone(), self.rho2.clone())
    }
}

fn both_rules() -> Vec<RadiusRule> {
    vec![RadiusRule::Family, RadiusRule::PerGraph]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSection {
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_sweeps")]
    pub max_sweeps: usize,
}

impl Default for EmbeddingSection {
    fn default() -> Self {
        EmbeddingSection { restarts: default_restarts(), max_sweeps: default_sweeps() }
    }
}

fn default_restarts() -> usize {
    8
}

fn default_sweeps() -> usize {
    60
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichSection {
    pub spaces: Vec<String>,
    #[serde(default = "default_level")]
    pub level: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_sweeps")]
    pub max_sweeps: usize,
    /// Skip graphs with more vertices.
    #[serde(default = "default_max_vertices")]
    pub max_vertices: usize,
}

fn default_max_vertices() -> usize {
    12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaSurveySection {
    pub complexes: Vec<String>,
    pub trials: usize,
    #[serde(default = "default_atoms")]
    pub atoms_max: usize,
    #[serde(default = "default_level")]
    pub level: usize,
    #[serde(default = "default_cone_fraction")]
    pub cone_fraction: f64,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
}

fn default_atoms() -> usize {
    8
}

fn default_cone_fraction() -> f64 {
    0.5
}

fn default_iterations() -> usize {
    5000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// Write into a fresh `<name>-<UTC time>` subdirectory.
    #[serde(default = "yes")]
    pub timestamp: bool,
}

impl Default for OutputsSection {
    fn default() -> Self {
        OutputsSection { dir: default_dir(), timestamp: true }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn yes() -> bool {
    true
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn pipeline(&self) -> Result<&PipelineSection> {
        self.pipeline.as_ref().ok_or_else(|| Error::Config("missing [pipeline] section".into()))
    }

    fn check(&self) -> Result<()> {
        let p = self.pipeline()?;
        if p.stages.is_empty() {
            return Err(Error::Config("[pipeline] lists no stages".into()));
        }
        for stage in &p.stages {
            let missing = match stage {
                Stage::Spectral => None,
                Stage::Sandwich => self.sandwich.is_none().then_some("sandwich"),
                Stage::Obstruction if self.space.is_none() => Some("space"),
                Stage::Obstruction => self.moduli.is_none().then_some("moduli"),
                Stage::DeltaSurvey => self.delta_survey.is_none().then_some("delta_survey"),
            };
            if let Some(section) = missing {
                return Err(Error::Config(format!("stage {stage:?} needs a [{section}] section")));
            }
        }
        if let Some(m) = &self.moduli {
            m.moduli()?;
        }
        Ok(())
    }
}
