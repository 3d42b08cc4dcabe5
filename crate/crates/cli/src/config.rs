use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clipforge::codec_gateway::{builtin_profile, EncoderProfile, SyntheticCodecSpec};
use clipforge::lambda_opt::LambdaSearchConfig;
use clipforge::learn::{GbtParams, SvmParams};
use clipforge::load_predict::PricingTable;
use clipforge::preproc_opt::SweepGrid;
use serde::{Deserialize, Serialize};

/// Job configuration (TOML). Every table is optional; command-line flags
/// override the values here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub output_dir: Option<PathBuf>,
    /// Encoder profiles in addition to the built-in ones.
    pub profiles: Vec<EncoderProfile>,
    pub lambda: LambdaSearchConfig,
    pub synthetic: SyntheticCodecSpec,
    pub sweep: SweepGrid,
    pub time_model: GbtParams,
    pub classifier: SvmParams,
    /// Pricing table file; the built-in table otherwise.
    pub pricing: Option<PathBuf>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: Self = toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        for p in &self.profiles {
            p.validate()?;
        }
        self.lambda.validate()?;
        self.synthetic.validate()?;
        self.sweep.validate()?;
        Ok(())
    }

    /// A configured profile first, then a built-in one.
    pub fn profile(&self, name: &str) -> Result<EncoderProfile> {
        if let Some(p) = self.profiles.iter().find(|p| p.name == name) {
            return Ok(p.clone());
        }
        match builtin_profile(name) {
            Some(p) => Ok(p),
            None => {
                let mut known: Vec<String> = self.profiles.iter().map(|p| p.name.clone()).collect();
                known.extend(clipforge::codec_gateway::builtin_profiles().into_iter().map(|p| p.name));
                bail!("unknown encoder profile `{name}` (known: {})", known.join(", "))
            }
        }
    }

    pub fn pricing_table(&self) -> Result<PricingTable> {
        match &self.pricing {
            None => Ok(PricingTable::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading pricing {}", p.display()))?;
                PricingTable::from_toml(&text).with_context(|| format!("pricing table {}", p.display()))
            }
        }
    }
}
