//! Flat `key=value` configuration files.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mcmc::SamplerConfig;
use crate::model::{ModelConfig, ScoreScale};

/// Keys accepted in a configuration file.
pub const KEYS: [&str; 19] = [
    "k",
    "chains",
    "iterations",
    "burn_in",
    "thin",
    "seed",
    "jobs",
    "adapt_window",
    "burn_in_included",
    "sigma2_lambda",
    "beta_sd",
    "hyper_variance",
    "dirichlet",
    "logsd_lower",
    "logsd_upper",
    "pin_gamma",
    "threshold",
    "log_migration",
    "scale",
];

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}: expected key=value", i + 1)))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(Error::config(format!("line {}: unknown key '{key}'", i + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::config(format!("line {}: '{key}' given twice", i + 1)));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::config(format!("invalid value for {key}: '{raw}'")))
}

/// Everything `fit` needs besides the data location.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSettings {
    pub sampler: SamplerConfig,
    pub model: ModelConfig,
    pub threshold: f64,
    pub log_migration: bool,
    pub scale: Option<ScoreScale>,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            sampler: SamplerConfig::default(),
            model: ModelConfig::default(),
            threshold: crate::analysis::DEFAULT_THRESHOLD,
            log_migration: false,
            scale: None,
        }
    }
}

impl FitSettings {
    /// Applies configuration entries on top of the current settings. Changing `k`
    /// resets the Dirichlet concentration unless `dirichlet` is also given.
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        if let Some(k) = map.get("k") {
            self.set_k(value("k", k)?);
        }
        for (key, raw) in map {
            let s = &mut self.sampler;
            let m = &mut self.model;
            match key.as_str() {
                "k" => {}
                "chains" => s.chains = value(key, raw)?,
                "iterations" => s.iterations = value(key, raw)?,
                "burn_in" => s.burn_in = value(key, raw)?,
                "thin" => s.thin = value(key, raw)?,
                "seed" => s.seed = value(key, raw)?,
                "jobs" => s.jobs = value(key, raw)?,
                "adapt_window" => s.adapt_window = Some(value(key, raw)?),
                "burn_in_included" => s.burn_in_included = value(key, raw)?,
                "sigma2_lambda" => m.sigma2_lambda = value(key, raw)?,
                "beta_sd" => m.beta_sd = value(key, raw)?,
                "hyper_variance" => m.hyper_variance = value(key, raw)?,
                "dirichlet" => {
                    m.dirichlet = raw
                        .split(',')
                        .map(|a| value(key, a.trim()))
                        .collect::<Result<Vec<f64>>>()?;
                }
                "logsd_lower" => m.logsd_bounds.0 = value(key, raw)?,
                "logsd_upper" => m.logsd_bounds.1 = value(key, raw)?,
                "pin_gamma" => m.pin_gamma = value(key, raw)?,
                "threshold" => self.threshold = value(key, raw)?,
                "log_migration" => self.log_migration = value(key, raw)?,
                "scale" => self.scale = Some(ScoreScale::parse(raw)?),
                other => return Err(Error::config(format!("unknown key '{other}'"))),
            }
        }
        Ok(())
    }

    pub fn set_k(&mut self, k: usize) {
        if k != self.model.k {
            self.model.k = k;
            self.model.dirichlet = vec![1.0; k];
        }
    }

    /// Settings as `key=value` pairs, in the configuration-file vocabulary.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let s = &self.sampler;
        let m = &self.model;
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("k", m.k.to_string());
        put("chains", s.chains.to_string());
        put("iterations", s.iterations.to_string());
        put("burn_in", s.burn_in.to_string());
        put("thin", s.thin.to_string());
        put("seed", s.seed.to_string());
        put("jobs", s.jobs.to_string());
        if let Some(w) = s.adapt_window {
            put("adapt_window", w.to_string());
        }
        put("burn_in_included", s.burn_in_included.to_string());
        put("sigma2_lambda", m.sigma2_lambda.to_string());
        put("beta_sd", m.beta_sd.to_string());
        put("hyper_variance", m.hyper_variance.to_string());
        put(
            "dirichlet",
            m.dirichlet.iter().map(f64::to_string).collect::<Vec<_>>().join(","),
        );
        put("logsd_lower", m.logsd_bounds.0.to_string());
        put("logsd_upper", m.logsd_bounds.1.to_string());
        put("pin_gamma", m.pin_gamma.to_string());
        put("threshold", self.threshold.to_string());
        put("log_migration", self.log_migration.to_string());
        if let Some(scale) = &self.scale {
            put("scale", scale.to_string());
        }
        map
    }
}
