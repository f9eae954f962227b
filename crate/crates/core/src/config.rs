//! Pipeline configuration: one TOML file covering endpoints, paths,
//! thresholds, rate intervals and lexicon overrides. Secrets stay in the
//! environment; the file only names the variable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::countries::CountryAliases;
use crate::textnorm::DescriptorLexicon;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("fatal config: {0}")]
    FatalConfig(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub provider: ProviderConfig,
    pub cache: CacheConfig,
    pub gadm: GadmConfig,
    pub nominatim: NominatimConfig,
    pub wikidata: WikidataConfig,
    pub harmonize: HarmonizeConfig,
    pub pipeline: PipelineSection,
    /// Extra country-name aliases, name = ISO3.
    pub country_aliases: BTreeMap<String, String>,
    /// Optional TOML file with more aliases (same shape).
    pub country_alias_file: Option<PathBuf>,
    pub textnorm: TextnormConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            provider: ProviderConfig::default(),
            cache: CacheConfig::default(),
            gadm: GadmConfig::default(),
            nominatim: NominatimConfig::default(),
            wikidata: WikidataConfig::default(),
            harmonize: HarmonizeConfig::default(),
            pipeline: PipelineSection::default(),
            country_aliases: BTreeMap::new(),
            country_alias_file: None,
            textnorm: TextnormConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    /// Chat-completions style endpoint; empty means use the rule-based
    /// fallback parser.
    pub endpoint: Option<String>,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: Option<String>,
    /// Optional prompt template file (TOML); the built-in template
    /// otherwise.
    pub prompt_template: Option<PathBuf>,
    pub retries: u32,
    pub backoff_base_secs: f64,
    pub backoff_cap_secs: f64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            endpoint: None,
            model: "gpt-4o".to_string(),
            api_key_env: None,
            prompt_template: None,
            retries: 5,
            backoff_base_secs: 1.0,
            backoff_cap_secs: 32.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheConfig {
    pub dir: PathBuf,
    pub enabled: bool,
}

impl Default for CacheConfig {
    fn default() -> Self {
        CacheConfig {
            dir: PathBuf::from(".disgeo-cache"),
            enabled: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GadmConfig {
    pub path: Option<PathBuf>,
    pub fuzzy_threshold: f64,
    pub layers: [String; 3],
}

impl Default for GadmConfig {
    fn default() -> Self {
        GadmConfig {
            path: None,
            fuzzy_threshold: crate::gadm::DEFAULT_FUZZY_THRESHOLD,
            layers: ["ADM_1".into(), "ADM_2".into(), "ADM_3".into()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NominatimConfig {
    pub base_url: String,
    pub min_interval_secs: f64,
    pub retries: u32,
    pub backoff_min_secs: f64,
    pub backoff_max_secs: f64,
    pub result_limit: u32,
}

impl Default for NominatimConfig {
    fn default() -> Self {
        NominatimConfig {
            base_url: "https://nominatim.openstreetmap.org".to_string(),
            min_interval_secs: 1.0,
            retries: 4,
            backoff_min_secs: 0.5,
            backoff_max_secs: 2.0,
            result_limit: 5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WikidataConfig {
    pub endpoint: String,
    pub min_interval_secs: f64,
    pub retries: u32,
    pub backoff_min_secs: f64,
    pub backoff_max_secs: f64,
    pub result_limit: u32,
}

impl Default for WikidataConfig {
    fn default() -> Self {
        WikidataConfig {
            endpoint: "https://query.wikidata.org/sparql".to_string(),
            min_interval_secs: 0.5,
            retries: 4,
            backoff_min_secs: 0.5,
            backoff_max_secs: 2.0,
            result_limit: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarmonizeConfig {
    pub tau: f64,
}

impl Default for HarmonizeConfig {
    fn default() -> Self {
        HarmonizeConfig {
            tau: crate::harmonize::DEFAULT_TAU,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSection {
    pub concurrency: usize,
}

impl Default for PipelineSection {
    fn default() -> Self {
        PipelineSection { concurrency: 4 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextnormConfig {
    pub descriptors: Option<Vec<String>>,
    pub connectors: Option<Vec<String>>,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<PipelineConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::FatalConfig(format!("{}: {e}", path.display())))?;
        let config: PipelineConfig = toml::from_str(&text)
            .map_err(|e| ConfigError::FatalConfig(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Reject configurations outside documented ranges before any work
    /// starts; referenced paths must exist.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=100.0).contains(&self.gadm.fuzzy_threshold) {
            return Err(ConfigError::FatalConfig(format!(
                "gadm.fuzzy_threshold {} outside [0, 100]",
                self.gadm.fuzzy_threshold
            )));
        }
        if !(self.harmonize.tau > 0.0 && self.harmonize.tau <= 1.0) {
            return Err(ConfigError::FatalConfig(format!(
                "harmonize.tau {} outside (0, 1]",
                self.harmonize.tau
            )));
        }
        if self.pipeline.concurrency == 0 {
            return Err(ConfigError::FatalConfig("pipeline.concurrency is 0".into()));
        }
        for (label, v) in [
            ("nominatim.min_interval_secs", self.nominatim.min_interval_secs),
            ("wikidata.min_interval_secs", self.wikidata.min_interval_secs),
            ("provider.backoff_base_secs", self.provider.backoff_base_secs),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(ConfigError::FatalConfig(format!("{label} is {v}")));
            }
        }
        for (label, path) in [
            ("gadm.path", &self.gadm.path),
            ("provider.prompt_template", &self.provider.prompt_template),
            ("country_alias_file", &self.country_alias_file),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(ConfigError::FatalConfig(format!(
                        "{label} does not exist: {}",
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }

    /// API key from the configured environment variable; never logged.
    pub fn api_key(&self) -> Option<String> {
        self.provider
            .api_key_env
            .as_ref()
            .and_then(|name| std::env::var(name).ok())
            .filter(|k| !k.is_empty())
    }

    pub fn country_aliases(&self) -> Result<CountryAliases, ConfigError> {
        let mut aliases = CountryAliases::builtin();
        if let Some(path) = &self.country_alias_file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::FatalConfig(format!("{}: {e}", path.display())))?;
            let extra: BTreeMap<String, String> = toml::from_str(&text)
                .map_err(|e| ConfigError::FatalConfig(format!("{}: {e}", path.display())))?;
            for (name, iso3) in extra {
                aliases.extend(&name, &iso3);
            }
        }
        for (name, iso3) in &self.country_aliases {
            aliases.extend(name, iso3);
        }
        Ok(aliases)
    }

    pub fn descriptor_lexicon(&self) -> DescriptorLexicon {
        match (&self.textnorm.descriptors, &self.textnorm.connectors) {
            (None, None) => DescriptorLexicon::default(),
            (descriptors, connectors) => DescriptorLexicon::new(
                descriptors
                    .clone()
                    .unwrap_or_else(|| {
                        crate::textnorm::DEFAULT_DESCRIPTORS
                            .iter()
                            .map(|s| s.to_string())
                            .collect()
                    }),
                connectors.clone().unwrap_or_else(|| {
                    crate::textnorm::DEFAULT_CONNECTORS
                        .iter()
                        .map(|s| s.to_string())
                        .collect()
                }),
            ),
        }
    }

    pub fn nominatim_interval(&self) -> Duration {
        Duration::from_secs_f64(self.nominatim.min_interval_secs)
    }

    pub fn wikidata_interval(&self) -> Duration {
        Duration::from_secs_f64(self.wikidata.min_interval_secs)
    }
}
