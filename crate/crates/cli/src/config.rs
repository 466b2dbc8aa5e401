use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use cpforge::adapt::{SimulatedAgent, ARMS};
use cpforge::content_space::{AttributeRanges, ElementCaps};
use cpforge::generator::GeneratorConfig;
use cpforge::learn::LearnParams;
use cpforge::oracle::OracleConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const CONFIG_ENV: &str = "CPFORGE_CONFIG";

/// Every tunable of the pipeline. A config file only needs the keys it changes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed for commands run without `--seed`.
    pub seed: u64,
    /// Segments drawn by `sample`.
    pub samples: usize,
    pub caps: ElementCaps,
    pub ranges: AttributeRanges,
    pub oracle: OracleConfig,
    pub learn: LearnParams,
    pub generator: GeneratorConfig,
    pub adapt: AdaptDefaults,
    pub range: RangeDefaults,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 1,
            samples: 19_000,
            caps: ElementCaps::MAX,
            ranges: AttributeRanges::default(),
            oracle: OracleConfig::default(),
            learn: LearnParams::default(),
            generator: GeneratorConfig::default(),
            adapt: AdaptDefaults::default(),
            range: RangeDefaults::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptDefaults {
    pub theta_opt: f64,
    pub games: usize,
    pub trials: usize,
    pub cps_per_game: usize,
    /// Named survival vectors usable with `--agent`.
    pub profiles: BTreeMap<String, [f64; ARMS]>,
}

impl Default for AdaptDefaults {
    fn default() -> Self {
        AdaptDefaults {
            theta_opt: 0.8,
            games: 30,
            trials: 30,
            cps_per_game: 10,
            profiles: SimulatedAgent::PROFILES.iter().map(|(n, p)| ((*n).to_string(), *p)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RangeDefaults {
    pub per_setting: usize,
    pub bins: usize,
    pub cps: usize,
}

impl Default for RangeDefaults {
    fn default() -> Self {
        RangeDefaults { per_setting: 1000, bins: 20, cps: 10 }
    }
}

impl Config {
    /// Explicit path first, then `CPFORGE_CONFIG`, then the defaults.
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let path = match path {
            Some(p) => Some(p.to_path_buf()),
            None => std::env::var_os(CONFIG_ENV).filter(|v| !v.is_empty()).map(PathBuf::from),
        };
        let cfg = match path {
            None => Config::default(),
            Some(p) => {
                let text = fs::read_to_string(&p).map_err(|e| CliError::io(&p, e))?;
                Config::parse(&text).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?
            }
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Config, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    /// Generator settings with the shared ranges and jump model filled in.
    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig { ranges: self.ranges.clone(), jump: self.oracle.jump, ..self.generator.clone() }
    }

    fn check(&self) -> Result<(), CliError> {
        if !self.caps.within(&ElementCaps::MAX) {
            return Err(CliError::Usage(format!("element caps {:?} exceed the content space", self.caps)));
        }
        for (name, p) in &self.adapt.profiles {
            SimulatedAgent::new(name.clone(), *p).map_err(|e| CliError::Usage(format!("profile {name}: {e}")))?;
        }
        Ok(())
    }
}
