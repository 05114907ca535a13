//! Experiment configuration: a strict TOML schema mapped onto library specs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sublevy::{
    BaseProcessSpec, CovOperator, DiscreteJumps, Family, HnigParams, HvgParams, JumpLaw, SpaceLayout, StableParams,
    SubordinatedProcessSpec, SubordinatorJumps, SubordinatorSpec, TruncatedVector, UnivariateSubordinator,
};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: SpecConfig,
    /// Spec whose analytic formulas the samples of `spec` are compared with.
    /// Defaults to `spec`; set it to a perturbed copy for a negative control.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic: Option<SpecConfig>,
    pub run: RunConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecConfig {
    Hnig {
        layout: Vec<usize>,
        s: f64,
        c: f64,
        b: Vec<f64>,
        q: CovConfig,
    },
    Stable {
        layout: Vec<usize>,
        alpha: f64,
        q: CovConfig,
    },
    Hvg {
        layout: Vec<usize>,
        a: f64,
        b: Vec<f64>,
        q: CovConfig,
    },
    Explicit {
        layout: Vec<usize>,
        base: BaseConfig,
        subordinator: SubordinatorConfig,
    },
}

/// Covariance blocks, either by their diagonals or as full symmetric matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum CovConfig {
    Diagonal(Vec<Vec<f64>>),
    Blocks(Vec<Vec<Vec<f64>>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseConfig {
    pub drift: Vec<f64>,
    pub q: CovConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jumps: Vec<BaseJumpConfig>,
}

/// Finite jump measure `rate · Σ weights_i δ_{points_i}` on one component.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseJumpConfig {
    pub component: usize,
    pub rate: f64,
    pub weights: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubordinatorConfig {
    /// Defaults to zero drift.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
    #[serde(default)]
    pub jumps: JumpsConfig,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpsConfig {
    #[default]
    None,
    Independent {
        laws: Vec<LawConfig>,
    },
    CompoundPoisson {
        rate: f64,
        law: CpLawConfig,
    },
    CommonFactor {
        loadings: Vec<f64>,
        factor: LawConfig,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        idiosyncratic: Option<Vec<LawConfig>>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum LawConfig {
    None,
    InverseGaussian { s: f64, c: f64 },
    Stable { alpha: f64, scale: f64 },
    Gamma { shape: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CpLawConfig {
    Atoms { weights: Vec<f64>, points: Vec<Vec<f64>> },
    Exponential { direction: Vec<f64>, mean: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Mandatory: there is no clock-derived default.
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_t")]
    pub t: f64,
    /// Time grid for path simulation; i.i.d. draws of `X(t)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<f64>>,
    /// Flat probe points for `exponent` when none are given on the command line.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<Vec<f64>>,
}

fn default_samples() -> usize {
    10_000
}

fn default_t() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    Cf,
    Moments,
    Scaling,
    Tail,
    Growth,
    Jumps,
}

impl CheckId {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Cf => "cf",
            Self::Moments => "moments",
            Self::Scaling => "scaling",
            Self::Tail => "tail",
            Self::Growth => "growth",
            Self::Jumps => "jumps",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "default_checks")]
    pub enabled: Vec<CheckId>,
    #[serde(default)]
    pub cf: CfOverrides,
    #[serde(default)]
    pub moments: MomentOverrides,
    #[serde(default)]
    pub scaling: ScalingOverrides,
    #[serde(default)]
    pub tail: TailOverrides,
    #[serde(default)]
    pub growth: GrowthOverrides,
    #[serde(default)]
    pub jumps: JumpOverrides,
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            enabled: default_checks(),
            cf: Default::default(),
            moments: Default::default(),
            scaling: Default::default(),
            tail: Default::default(),
            growth: Default::default(),
            jumps: Default::default(),
        }
    }
}

fn default_checks() -> Vec<CheckId> {
    vec![CheckId::Cf, CheckId::Moments]
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfOverrides {
    pub samples: Option<usize>,
    pub probes: Option<usize>,
    pub max_radius: Option<f64>,
    pub k: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentOverrides {
    pub samples: Option<usize>,
    pub k: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingOverrides {
    /// Claimed index; defaults to the stable family's α.
    pub alpha: Option<f64>,
    pub t: Option<f64>,
    pub samples: Option<usize>,
    pub significance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailOverrides {
    pub samples: Option<usize>,
    pub top_fraction: Option<f64>,
    pub expect: Option<TailExpect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TailExpect {
    NoPowerLaw,
    Index { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthOverrides {
    pub thetas: Option<Vec<Vec<f64>>>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpOverrides {
    pub radii: Option<Vec<f64>>,
    pub step: Option<f64>,
    pub increments: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from(".")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}

impl ExperimentConfig {
    pub fn parse_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a TOML config or a JSON report, taking the report's embedded config.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            #[derive(Deserialize)]
            struct Embedded {
                config: ExperimentConfig,
            }
            let r: Embedded =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            r.config.validate()?;
            Ok(r.config)
        } else {
            Self::parse_toml(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
                e => e,
            })
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.spec.build()?;
        if let Some(a) = &self.analytic {
            let (s, a) = (self.spec.build()?, a.build()?);
            if s.layout() != a.layout() || s.subordinator().components() != a.subordinator().components() {
                return Err(CliError::Config(
                    "analytic spec must have the same layout as spec".into(),
                ));
            }
        }
        if !(self.run.t > 0.0 && self.run.t.is_finite()) {
            return Err(CliError::Config("run.t must be > 0".into()));
        }
        if self.run.samples == 0 {
            return Err(CliError::Config("run.samples must be > 0".into()));
        }
        if let Some(grid) = &self.run.grid {
            if grid.is_empty() || grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return Err(CliError::Config(
                    "run.grid must be a non-empty list of times >= 0".into(),
                ));
            }
            if grid.windows(2).any(|w| w[1] < w[0]) {
                return Err(CliError::Config("run.grid must be nondecreasing".into()));
            }
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Config("output.formats must not be empty".into()));
        }
        Ok(())
    }

    pub fn analytic_spec(&self) -> Result<SubordinatedProcessSpec, CliError> {
        self.analytic.as_ref().unwrap_or(&self.spec).build()
    }
}

fn cov(layout: &SpaceLayout, q: &CovConfig) -> sublevy::Result<CovOperator> {
    match q {
        CovConfig::Diagonal(d) => CovOperator::diagonal(layout, d.clone()),
        CovConfig::Blocks(b) => CovOperator::from_symmetric(layout, b.clone()),
    }
}

fn law(l: &LawConfig) -> Option<UnivariateSubordinator> {
    match *l {
        LawConfig::None => None,
        LawConfig::InverseGaussian { s, c } => Some(UnivariateSubordinator::InverseGaussian { s, c }),
        LawConfig::Stable { alpha, scale } => Some(UnivariateSubordinator::Stable { alpha, scale }),
        LawConfig::Gamma { shape } => Some(UnivariateSubordinator::Gamma { shape }),
    }
}

impl SpecConfig {
    pub fn layout_dims(&self) -> &[usize] {
        match self {
            Self::Hnig { layout, .. } | Self::Stable { layout, .. } | Self::Hvg { layout, .. } => layout,
            Self::Explicit { layout, .. } => layout,
        }
    }

    pub fn family(&self) -> Result<Option<Family>, CliError> {
        let layout = SpaceLayout::new(self.layout_dims().to_vec())?;
        Ok(match self {
            Self::Hnig { s, c, b, q, .. } => Some(Family::Hnig(HnigParams {
                s: *s,
                c: *c,
                b: TruncatedVector::from_flat(&layout, b.clone())?,
                q: cov(&layout, q)?,
            })),
            Self::Stable { alpha, q, .. } => Some(Family::Stable(StableParams {
                alpha: *alpha,
                q: cov(&layout, q)?,
            })),
            Self::Hvg { a, b, q, .. } => Some(Family::Hvg(HvgParams {
                a: *a,
                b: TruncatedVector::from_flat(&layout, b.clone())?,
                q: cov(&layout, q)?,
            })),
            Self::Explicit { .. } => None,
        })
    }

    pub fn build(&self) -> Result<SubordinatedProcessSpec, CliError> {
        if let Some(f) = self.family()? {
            return Ok(f.spec()?);
        }
        let Self::Explicit {
            layout,
            base,
            subordinator,
        } = self
        else {
            unreachable!("families are handled above");
        };
        let layout = SpaceLayout::new(layout.clone())?;
        let d = layout.components();
        let mut jumps = vec![None; d];
        for j in &base.jumps {
            let slot = jumps
                .get_mut(j.component)
                .ok_or_else(|| CliError::Config(format!("base jump component {} out of range", j.component)))?;
            if slot.is_some() {
                return Err(CliError::Config(format!(
                    "duplicate jumps for component {}",
                    j.component
                )));
            }
            *slot = Some(DiscreteJumps::new(j.rate, j.weights.clone(), j.points.clone())?);
        }
        let base = BaseProcessSpec::new(
            TruncatedVector::from_flat(&layout, base.drift.clone())?,
            cov(&layout, &base.q)?,
            jumps,
        )?;
        let drift = subordinator.drift.clone().unwrap_or_else(|| vec![0.0; d]);
        let sj = match &subordinator.jumps {
            JumpsConfig::None => SubordinatorJumps::None,
            JumpsConfig::Independent { laws } => SubordinatorJumps::Independent(laws.iter().map(law).collect()),
            JumpsConfig::CompoundPoisson { rate, law } => SubordinatorJumps::CompoundPoisson {
                rate: *rate,
                law: match law {
                    CpLawConfig::Atoms { weights, points } => JumpLaw::Atoms {
                        weights: weights.clone(),
                        points: points.clone(),
                    },
                    CpLawConfig::Exponential { direction, mean } => JumpLaw::Exponential {
                        direction: direction.clone(),
                        mean: *mean,
                    },
                },
            },
            JumpsConfig::CommonFactor {
                loadings,
                factor,
                idiosyncratic,
            } => SubordinatorJumps::CommonFactor {
                loadings: loadings.clone(),
                factor: law(factor).ok_or_else(|| CliError::Config("common factor law must not be none".into()))?,
                idiosyncratic: idiosyncratic
                    .as_ref()
                    .map(|v| v.iter().map(law).collect())
                    .unwrap_or_else(|| vec![None; d]),
            },
        };
        Ok(SubordinatedProcessSpec::new(base, SubordinatorSpec::new(drift, sj)?)?)
    }
}
