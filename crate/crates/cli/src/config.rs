//! Settings from flags, an optional TOML file and the library defaults, in
//! that order of precedence.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use aq_core::{AqConfig, Family};
use clap::Args;
use serde::Deserialize;

/// Keys accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub family: Option<String>,
    pub l: Option<usize>,
    pub seed: Option<u64>,
    pub p_bin_list: Option<Vec<f64>>,
    pub it_max: Option<usize>,
    pub min_distance: Option<f64>,
    pub n_findc: Option<usize>,
    pub l_bin: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML file with default settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Representative family: dirac, uniform, gaussian, hybrid or flood.
    #[arg(long)]
    pub family: Option<String>,
    /// Number of mixture components.
    #[arg(long)]
    pub l: Option<usize>,
    /// Random seed.
    #[arg(long, env = "AQ_SEED")]
    pub seed: Option<u64>,
    /// Comma-separated perturbation schedule; an empty string disables perturbation.
    #[arg(long)]
    pub p_bin_list: Option<String>,
    #[arg(long)]
    pub it_max: Option<usize>,
    #[arg(long)]
    pub min_distance: Option<f64>,
    /// Number of mixture draws per cluster assignment.
    #[arg(long)]
    pub n_findc: Option<usize>,
    /// Clusters split per perturbation.
    #[arg(long)]
    pub l_bin: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Merged settings. Family and `l` stay optional because each subcommand has
/// its own defaults for them.
#[derive(Debug, Clone)]
pub struct Settings {
    pub family: Option<Family>,
    pub l: Option<usize>,
    pub seed: u64,
    pub p_bin_list: Option<Vec<f64>>,
    pub it_max: Option<usize>,
    pub min_distance: Option<f64>,
    pub n_findc: Option<usize>,
    pub l_bin: Option<usize>,
    pub out_dir: PathBuf,
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("invalid p_bin value {s:?}")))
        .collect()
}

impl Settings {
    pub fn resolve(common: &Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let family = match common.family.clone().or(file.family) {
            Some(name) => Some(name.parse::<Family>().map_err(anyhow::Error::msg)?),
            None => None,
        };
        let p_bin_list = match &common.p_bin_list {
            Some(text) => Some(parse_list(text)?),
            None => file.p_bin_list,
        };
        Ok(Self {
            family,
            l: common.l.or(file.l),
            seed: common.seed.or(file.seed).unwrap_or(0),
            p_bin_list,
            it_max: common.it_max.or(file.it_max),
            min_distance: common.min_distance.or(file.min_distance),
            n_findc: common.n_findc.or(file.n_findc),
            l_bin: common.l_bin.or(file.l_bin),
            out_dir: common
                .out_dir
                .clone()
                .or(file.out_dir)
                .unwrap_or_else(|| PathBuf::from("aq-out")),
        })
    }

    pub fn family_or(&self, default: Family) -> Family {
        self.family.unwrap_or(default)
    }

    /// Library defaults overridden by whatever was given.
    pub fn aq_config(&self, l: usize, family: Family) -> Result<AqConfig> {
        let mut c = AqConfig::new(l, family).with_seed(self.seed);
        if let Some(list) = &self.p_bin_list {
            c.p_bin_schedule = list.clone();
        }
        if let Some(v) = self.it_max {
            c.it_max = v;
        }
        if let Some(v) = self.min_distance {
            c.min_distance = v;
        }
        if let Some(v) = self.n_findc {
            c.n_findc = Some(v);
        }
        if let Some(v) = self.l_bin {
            c.l_bin = v;
        }
        if l == 0 {
            bail!("l must be at least 1");
        }
        c.validate()?;
        Ok(c)
    }
}
