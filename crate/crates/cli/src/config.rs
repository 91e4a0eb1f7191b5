//! `key = value` config files layered under command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use taac_core::{Error, Result, TaacConfig};

pub const ENV_VAR: &str = "TAAC_CONFIG";

/// Parses config lines into `(line, key, value)`; `#` starts a comment.
pub fn parse_lines(text: &str, path: &Path) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        out.push((i + 1, key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Explicit path first, then the environment variable.
pub fn resolve_path(explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// Built-in defaults overlaid with the file at `path`, if any.
pub fn load(path: Option<&Path>) -> Result<TaacConfig> {
    let mut config = TaacConfig::default();
    let Some(path) = path else {
        return Ok(config);
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    for (line, key, value) in parse_lines(&text, path)? {
        config.set(&key, &value).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}:{line}: {msg}", path.display())),
            Error::Validation { field, message } => Error::Validation {
                field,
                message: format!("{message} ({}:{line})", path.display()),
            },
            other => other,
        })?;
    }
    Ok(config)
}
