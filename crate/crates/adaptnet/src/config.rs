//! Strict JSON scenario loading.

use std::path::Path;

use adaptnet_core::ScenarioConfig;

use crate::error::{AppError, AppResult};

/// Parses and validates a config document. Missing keys take defaults;
/// unknown keys, type mismatches and constraint violations are all
/// reported as configuration errors naming the offending field.
pub fn load_config_str(text: &str) -> AppResult<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let msg = inner.to_string();
        let field = match unknown_field(&msg) {
            Some(key) if path == "." || path.is_empty() => key.to_string(),
            Some(key) if !path.ends_with(key) => format!("{path}.{key}"),
            _ if path == "." || path.is_empty() => "<document>".to_string(),
            _ => path,
        };
        AppError::Config { field, message: msg }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> AppResult<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    load_config_str(&text)
}

fn unknown_field(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

/// Canonical serialized form, used for logs and checkpoints.
pub fn to_canonical_json(config: &ScenarioConfig) -> String {
    serde_json::to_string_pretty(config).expect("config serializes")
}
