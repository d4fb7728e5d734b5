//! Experiment configuration files.

use std::path::Path;

use fishnet::{
    FishnetGeometry, GraftedGaussianPower, GraftedWeibullGaussian, StrengthDistribution, TruncatedGaussian, Weibull,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub models: Option<ModelsConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<EtaConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "one")]
    pub link_length: f64,
    #[serde(default = "one")]
    pub link_area: f64,
    #[serde(default = "one")]
    pub modulus: f64,
}

fn one() -> f64 {
    1.0
}

impl GeometryConfig {
    pub fn to_geometry(&self) -> FishnetGeometry {
        FishnetGeometry {
            link_length: self.link_length,
            link_area: self.link_area,
            modulus: self.modulus,
            ..FishnetGeometry::new(self.rows, self.cols)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    GraftedGaussianPower,
    GraftedWeibullGaussian,
    Weibull,
    Gaussian,
}

/// Strength law. Omitted parameters of the grafted families fall back to
/// the built-in light-tail and heavy-tail laws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionConfig {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sd: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graft_prob: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graft_stress: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weibull_shape: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weibull_scale: Option<f64>,
    /// Gaussian-branch constants; derived from `sd` and normalization when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erf_scale: Option<f64>,
}

impl DistributionConfig {
    fn preset(family: Family) -> Self {
        let blank = Self {
            family,
            mean: None,
            sd: None,
            tail_exponent: None,
            graft_prob: None,
            graft_stress: None,
            weibull_shape: None,
            weibull_scale: None,
            core_scale: None,
            erf_scale: None,
        };
        match family {
            Family::GraftedGaussianPower => Self {
                mean: Some(10.0),
                sd: Some(0.8),
                tail_exponent: Some(38.0),
                graft_prob: Some(0.015),
                graft_stress: Some(8.4),
                core_scale: Some(0.884),
                erf_scale: Some(0.504),
                ..blank
            },
            Family::GraftedWeibullGaussian => Self {
                mean: Some(10.0),
                sd: Some(0.8),
                graft_prob: Some(0.08955),
                graft_stress: Some(8.6),
                weibull_shape: Some(10.0),
                weibull_scale: Some(12.0),
                core_scale: Some(0.884),
                erf_scale: Some(0.474),
                ..blank
            },
            Family::Weibull | Family::Gaussian => blank,
        }
    }

    fn shape_fields(&self) -> [&Option<f64>; 7] {
        [
            &self.mean,
            &self.sd,
            &self.tail_exponent,
            &self.graft_prob,
            &self.graft_stress,
            &self.weibull_shape,
            &self.weibull_scale,
        ]
    }

    /// Fills defaults so that every parameter the family uses is explicit.
    pub fn normalized(&self) -> Result<Self, CliError> {
        let preset = Self::preset(self.family);
        let pick = |own: Option<f64>, def: Option<f64>| own.or(def);
        let untouched = self.shape_fields().iter().all(|f| f.is_none());
        let mut out = Self {
            family: self.family,
            mean: pick(self.mean, preset.mean),
            sd: pick(self.sd, preset.sd),
            tail_exponent: pick(self.tail_exponent, preset.tail_exponent),
            graft_prob: pick(self.graft_prob, preset.graft_prob),
            graft_stress: pick(self.graft_stress, preset.graft_stress),
            weibull_shape: pick(self.weibull_shape, preset.weibull_shape),
            weibull_scale: pick(self.weibull_scale, preset.weibull_scale),
            core_scale: self.core_scale,
            erf_scale: self.erf_scale,
        };
        if untouched && self.core_scale.is_none() && self.erf_scale.is_none() {
            out.core_scale = preset.core_scale;
            out.erf_scale = preset.erf_scale;
        }
        let unused: &[(&str, bool)] = match self.family {
            Family::GraftedGaussianPower => &[
                ("weibull_shape", out.weibull_shape.is_some()),
                ("weibull_scale", out.weibull_scale.is_some()),
            ],
            Family::GraftedWeibullGaussian => &[("tail_exponent", out.tail_exponent.is_some())],
            Family::Weibull => &[
                ("mean", out.mean.is_some()),
                ("sd", out.sd.is_some()),
                ("tail_exponent", out.tail_exponent.is_some()),
                ("graft_prob", out.graft_prob.is_some()),
                ("graft_stress", out.graft_stress.is_some()),
                ("core_scale", out.core_scale.is_some()),
                ("erf_scale", out.erf_scale.is_some()),
            ],
            Family::Gaussian => &[
                ("tail_exponent", out.tail_exponent.is_some()),
                ("graft_prob", out.graft_prob.is_some()),
                ("graft_stress", out.graft_stress.is_some()),
                ("weibull_shape", out.weibull_shape.is_some()),
                ("weibull_scale", out.weibull_scale.is_some()),
                ("core_scale", out.core_scale.is_some()),
                ("erf_scale", out.erf_scale.is_some()),
            ],
        };
        if let Some((key, _)) = unused.iter().find(|(_, set)| *set) {
            return Err(CliError::Config(format!(
                "distribution.{key} does not apply to family {}",
                family_name(self.family)
            )));
        }
        if out.core_scale.is_some() != out.erf_scale.is_some() {
            return Err(CliError::Config(
                "distribution.core_scale and distribution.erf_scale must be given together".into(),
            ));
        }
        Ok(out)
    }

    pub fn build(&self) -> Result<StrengthDistribution, CliError> {
        let n = self.normalized()?;
        let need = |v: Option<f64>, key: &str| {
            v.ok_or_else(|| CliError::Config(format!("missing key distribution.{key}")))
        };
        let built: fishnet::Result<StrengthDistribution> = match n.family {
            Family::GraftedGaussianPower => {
                let (mean, sd, m0, gs, gp) = (
                    need(n.mean, "mean")?,
                    need(n.sd, "sd")?,
                    need(n.tail_exponent, "tail_exponent")?,
                    need(n.graft_stress, "graft_stress")?,
                    need(n.graft_prob, "graft_prob")?,
                );
                match (n.core_scale, n.erf_scale) {
                    (Some(c), Some(e)) => GraftedGaussianPower::with_core_constants(mean, sd, m0, gs, gp, c, e),
                    _ => GraftedGaussianPower::new(mean, sd, m0, gs, gp),
                }
                .map(Into::into)
            }
            Family::GraftedWeibullGaussian => {
                let (mean, sd, k, s0, gs, gp) = (
                    need(n.mean, "mean")?,
                    need(n.sd, "sd")?,
                    need(n.weibull_shape, "weibull_shape")?,
                    need(n.weibull_scale, "weibull_scale")?,
                    need(n.graft_stress, "graft_stress")?,
                    need(n.graft_prob, "graft_prob")?,
                );
                match (n.core_scale, n.erf_scale) {
                    (Some(c), Some(e)) => GraftedWeibullGaussian::with_core_constants(mean, sd, k, s0, gs, gp, c, e),
                    _ => GraftedWeibullGaussian::new(mean, sd, k, s0, gs, gp),
                }
                .map(Into::into)
            }
            Family::Weibull => {
                Weibull::new(need(n.weibull_shape, "weibull_shape")?, need(n.weibull_scale, "weibull_scale")?)
                    .map(Into::into)
            }
            Family::Gaussian => TruncatedGaussian::new(need(n.mean, "mean")?, need(n.sd, "sd")?).map(Into::into),
        };
        built.map_err(|e| CliError::Config(format!("distribution: {e}")))
    }
}

pub fn family_name(f: Family) -> &'static str {
    match f {
        Family::GraftedGaussianPower => "grafted-gaussian-power",
        Family::GraftedWeibullGaussian => "grafted-weibull-gaussian",
        Family::Weibull => "weibull",
        Family::Gaussian => "gaussian",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub count: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default)]
    pub record_curves: bool,
    #[serde(default = "default_bins")]
    pub hist_bins: usize,
}

fn default_bins() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsConfig {
    /// Link count of the modelled structure; defaults to the geometry's.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_links: Option<usize>,
    /// Fit the constants on a solved mesh instead of taking them from the lists.
    #[serde(default)]
    pub calibrate: bool,
    #[serde(default = "default_calibration_mesh")]
    pub calibration_mesh: [usize; 2],
    #[serde(default)]
    pub eta_a: Vec<f64>,
    #[serde(default)]
    pub nu1: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu2: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_max: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_calibration_mesh() -> [usize; 2] {
    [64, 64]
}

fn default_points() -> usize {
    400
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaConfig {
    /// `none`, `center`, `slit:k`, or `links:a,b,...`.
    pub damage: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_links: usize,
    /// `[rows, cols]` pairs.
    pub shapes: Vec<[usize; 2]>,
    #[serde(default = "default_points")]
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn normalized(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        if let Some(d) = &self.distribution {
            out.distribution = Some(d.normalized()?);
        }
        Ok(out)
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn geometry(&self) -> Result<&GeometryConfig, CliError> {
        self.geometry.as_ref().ok_or_else(|| missing("geometry"))
    }

    pub fn distribution(&self) -> Result<&DistributionConfig, CliError> {
        self.distribution.as_ref().ok_or_else(|| missing("distribution"))
    }

    pub fn sampling(&self) -> Result<&SamplingConfig, CliError> {
        self.sampling.as_ref().ok_or_else(|| missing("sampling"))
    }

    pub fn models(&self) -> Result<&ModelsConfig, CliError> {
        self.models.as_ref().ok_or_else(|| missing("models"))
    }

    pub fn sweep(&self) -> Result<&SweepConfig, CliError> {
        self.sweep.as_ref().ok_or_else(|| missing("sweep"))
    }
}

fn missing(table: &str) -> CliError {
    CliError::Config(format!("missing table [{table}]"))
}
