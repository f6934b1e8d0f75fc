//! Defaults read from the JSON file named by `SIBUYA_LAB_CONFIG`.
//! Flags override these; built-ins apply when neither is set.

use std::path::Path;

use serde::Deserialize;

pub const CONFIG_ENV: &str = "SIBUYA_LAB_CONFIG";

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub n_max: Option<usize>,
    pub j_max: Option<usize>,
    pub seed: Option<u64>,
    pub replicas: Option<usize>,
    pub t_end: Option<f64>,
    pub format: Option<String>,
}

impl Defaults {
    pub fn load() -> Result<Self, String> {
        match std::env::var_os(CONFIG_ENV) {
            Some(p) => Self::from_path(Path::new(&p)),
            None => Ok(Self::default()),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{CONFIG_ENV}: cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{CONFIG_ENV}: {}: {e}", path.display()))
    }
}

/// Flag value, else config value, else built-in.
pub fn pick<T>(flag: Option<T>, config: Option<T>, builtin: T) -> T {
    flag.or(config).unwrap_or(builtin)
}
