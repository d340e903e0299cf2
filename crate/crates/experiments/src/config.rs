//! TOML run configuration.
//!
//! Every table rejects unknown keys. Command-line flags are merged on top of
//! the file before the values are validated.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use homophily_core::{MixedVariant, ModelParams, VaccinationParams};
use serde::{Deserialize, Serialize};

use crate::stochastic::CrossCheckSpec;
use crate::sweep::{Grid, Quantity, SweptParam};

/// Directory searched for relative config paths that do not resolve from
/// the working directory.
pub const CONFIG_DIR_ENV: &str = "HOMOPHILY_CONFIG_DIR";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub model: ModelSection,
    pub vaccination: Option<VaccinationSection>,
    pub sweep: Option<SweepSection>,
    pub sir: Option<SirSection>,
    pub cross_check: Option<CrossCheckSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub q: Option<f64>,
    pub h: Option<f64>,
    pub mu: Option<f64>,
    pub x_a: Option<f64>,
    pub x_v: Option<f64>,
    pub r: Option<f64>,
    /// Initial deviation `(d rho_a, d rho_v)` for cumulative infection.
    pub shock: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VaxModel {
    #[default]
    Rational,
    Peer,
    Mixed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    #[default]
    AsWritten,
    Theta,
}

impl From<VariantName> for MixedVariant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::AsWritten => MixedVariant::AsWritten,
            VariantName::Theta => MixedVariant::Theta,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VaccinationSection {
    #[serde(default)]
    pub model: VaxModel,
    #[serde(default)]
    pub variant: VariantName,
    pub k: Option<f64>,
    pub d: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub param: SweptParam,
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub outputs: Vec<Quantity>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirSection {
    /// Initial infected share per group; `0` is the vanishing-seed limit.
    #[serde(default)]
    pub seed: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossCheckSection {
    pub agents: Option<usize>,
    pub horizon: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub initial: Option<f64>,
}

/// Vaccination model with validated cost parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaccinationSpec {
    pub model: VaxModel,
    pub variant: MixedVariant,
    pub params: VaccinationParams,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads `path`, falling back to `$HOMOPHILY_CONFIG_DIR/path` for
    /// relative paths missing from the working directory.
    pub fn load(path: &Path) -> Result<Self> {
        let resolved = resolve(path)?;
        let text = std::fs::read_to_string(&resolved)
            .with_context(|| format!("reading config {}", resolved.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", resolved.display()))
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let get = |name: &str, v: Option<f64>| {
            v.ok_or_else(|| anyhow!("missing model parameter `{name}` (set [model].{name} or pass --{})", name.replace('_', "-")))
        };
        Ok(ModelParams::new(
            get("q", m.q)?,
            get("h", m.h)?,
            get("mu", m.mu)?,
            get("x_a", m.x_a)?,
            get("x_v", m.x_v)?,
            m.r.unwrap_or(0.1),
        )?)
    }

    pub fn shock(&self) -> [f64; 2] {
        self.model.shock.unwrap_or([1.0, 1.0])
    }

    pub fn sir_seed(&self) -> f64 {
        self.sir.as_ref().map_or(0.0, |s| s.seed)
    }

    pub fn vaccination(&self) -> Result<Option<VaccinationSpec>> {
        let Some(v) = &self.vaccination else {
            return Ok(None);
        };
        let k = v.k.ok_or_else(|| anyhow!("missing vaccination parameter `k`"))?;
        Ok(Some(VaccinationSpec {
            model: v.model,
            variant: v.variant.into(),
            params: VaccinationParams::new(k, v.d.unwrap_or(0.0), v.b.unwrap_or(0.0))?,
        }))
    }

    pub fn require_vaccination(&self) -> Result<VaccinationSpec> {
        self.vaccination()?
            .ok_or_else(|| anyhow!("this command needs a [vaccination] table or --k"))
    }

    pub fn grid(&self) -> Result<(SweptParam, Grid, Vec<Quantity>, u64)> {
        let s = self.sweep.as_ref().ok_or_else(|| anyhow!("missing [sweep] table"))?;
        Ok((s.param, Grid { count: s.count, min: s.min, max: s.max }, s.outputs.clone(), s.seed))
    }

    pub fn cross_check(&self) -> Result<CrossCheckSpec> {
        let c = self.cross_check.clone().unwrap_or_default();
        let d = CrossCheckSpec::default();
        let spec = CrossCheckSpec {
            agents: c.agents.unwrap_or(d.agents),
            horizon: c.horizon.unwrap_or(d.horizon),
            replicates: c.replicates.unwrap_or(d.replicates),
            seed: c.seed.unwrap_or(d.seed),
            initial: c.initial.unwrap_or(d.initial),
        };
        if !(spec.horizon > 0.0) || !(spec.initial > 0.0 && spec.initial <= 1.0) {
            bail!("cross-check needs horizon > 0 and 0 < initial <= 1");
        }
        Ok(spec)
    }
}

fn resolve(path: &Path) -> Result<PathBuf> {
    if path.exists() || path.is_absolute() {
        return Ok(path.to_path_buf());
    }
    if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
        let candidate = Path::new(&dir).join(path);
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::parse("[model]\nq = 0.4\nmuu = 0.2\n").unwrap_err();
        assert!(err.to_string().contains("muu"), "{err}");
        assert!(Config::parse("[extra]\na = 1\n").is_err());
    }

    #[test]
    fn missing_model_values_are_named() {
        let cfg = Config::parse("[model]\nq = 0.4\nh = 0.2\n").unwrap();
        let err = cfg.model_params().unwrap_err().to_string();
        assert!(err.contains("`mu`") && err.contains("--mu"), "{err}");
    }

    #[test]
    fn full_config_parses() {
        let cfg = Config::parse(
            r#"
[model]
q = 0.4
h = 0.3
mu = 0.2
x_a = 0.1
x_v = 0.5
shock = [1.0, 0.5]

[vaccination]
model = "mixed"
variant = "theta"
k = 0.6
d = 0.05

[sweep]
param = "h"
count = 11
min = 0.0
max = 1.0
outputs = ["rho", "ci", "x_a_star"]
"#,
        )
        .unwrap();
        assert_eq!(cfg.model_params().unwrap().r(), 0.1);
        assert_eq!(cfg.shock(), [1.0, 0.5]);
        let v = cfg.require_vaccination().unwrap();
        assert_eq!((v.model, v.variant), (VaxModel::Mixed, MixedVariant::Theta));
        let (param, grid, outputs, _) = cfg.grid().unwrap();
        assert_eq!(param, SweptParam::H);
        assert_eq!(grid.count, 11);
        assert_eq!(outputs, vec![Quantity::Rho, Quantity::Ci, Quantity::XAStar]);
    }
}
