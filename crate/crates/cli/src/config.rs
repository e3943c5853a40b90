//! Flat TOML experiment configuration.
//!
//! Every key of [`hqrc::experiment::CONFIG_KEYS`] may appear once at top
//! level. Values are strings, integers or floats; `ensemble_size` also
//! takes `"inf"`, `tau_prime` takes `"auto"` or `"floor"`, `rho`/`iota`
//! take `"auto"`, and reals accept fractions such as `"7/9"`.

use std::fmt;

use hqrc::experiment::{ExperimentConfig, CONFIG_KEYS};
use toml::Value;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError(format!("malformed config: {e}")))?;
    let mut cfg = ExperimentConfig::default();
    // The task sets the gain defaults, so apply it first.
    if let Some(v) = table.get("task") {
        cfg.set("task", &scalar("task", v)?)
            .map_err(|e| ConfigError(format!("key 'task': {e}")))?;
    }
    for (key, value) in &table {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!(
                "unknown key '{key}' (accepted: {})",
                CONFIG_KEYS.join(", ")
            )));
        }
        let text = scalar(key, value)?;
        cfg.set(key, &text)
            .map_err(|e| ConfigError(format!("key '{key}': {e}")))?;
    }
    Ok(cfg)
}

fn scalar(key: &str, value: &Value) -> Result<String, ConfigError> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Integer(i) => Ok(i.to_string()),
        Value::Float(f) => Ok(f.to_string()),
        other => Err(ConfigError(format!(
            "key '{key}': expected a string or number, got {}",
            other.type_str()
        ))),
    }
}

/// TOML text reproducing `cfg`, usable as a starting config file.
pub fn render_config(cfg: &ExperimentConfig) -> String {
    let gain = |g: Option<f64>| g.map_or("\"auto\"".to_string(), |v| v.to_string());
    format!(
        "task = \"{}\"\ntau = {}\ntau_prime = \"{}\"\nn_modes = {}\nreflectivity = {}\nsparsity = {}\n\
         ensemble_size = \"{}\"\nn_esn = {}\nrho = {}\niota = {}\nwashout = {}\ntrain = {}\ntest = {}\n\
         ridge = {}\nrealizations = {}\nmaster_seed = {}\nbaseline = \"{}\"\n",
        cfg.task,
        cfg.tau,
        cfg.tau_prime,
        cfg.n_modes,
        cfg.reflectivity,
        cfg.sparsity,
        cfg.ensemble,
        cfg.n_esn,
        gain(cfg.rho),
        gain(cfg.iota),
        cfg.plan.washout,
        cfg.plan.train,
        cfg.plan.test,
        cfg.ridge,
        cfg.realizations,
        cfg.master_seed,
        cfg.baseline,
    )
}
