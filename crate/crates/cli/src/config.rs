//! Flat `key=value` config files, merged into the command line so that
//! explicit flags win.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const OUT_DIR_VAR: &str = "TORUS_DIMER_OUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config line {line}: expected key=value, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("--config needs a file name")]
    MissingPath,
}

/// Turns config lines into `--key value` pairs. Blank lines and lines
/// starting with `#` are skipped; a bare `key=true` becomes a flag.
pub fn parse(text: &str) -> Result<Vec<String>, ConfigError> {
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .filter(|(k, _)| !k.is_empty())
            .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: raw.to_string() })?;
        args.push(format!("--{}", key.replace('_', "-")));
        if value != "true" {
            args.push(value.to_string());
        }
    }
    Ok(args)
}

/// Removes `--config FILE` from `argv` and splices the file's options in
/// directly after the subcommand, ahead of any explicit flags.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, ConfigError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or(ConfigError::MissingPath)?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    let extra = parse(&text)?;
    // the subcommand is the first bare word after the program name, skipping
    // the value of --threads
    let mut at = 1;
    while at < rest.len() {
        if rest[at] == "--threads" {
            at += 2;
        } else if rest[at].starts_with('-') {
            at += 1;
        } else {
            break;
        }
    }
    let insert = (at + 1).min(rest.len());
    rest.splice(insert..insert, extra);
    Ok(rest)
}

/// Output location: relative paths are resolved against the directory in
/// the environment override, when set.
pub fn resolve_out(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}
