//! Flat `key=value` configuration files.
//!
//! Every key names a long flag of the subcommand (`swarm-size=200` or
//! `swarm_size=200`). Blank lines and lines starting with `#` are ignored.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use crate::error::{CliError, Result};

pub fn parse_config(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::parse(path, format!("line {}: expected key=value", n + 1)));
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::parse(path, format!("line {}: invalid key", n + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Inserts the flags of the file named by `--config` right after the
/// subcommand, so flags given on the command line take precedence.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    if args.len() < 2 {
        return Ok(args);
    }
    let Some(path) = config_path(&args[2..]) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let flags = parse_config(&text, path)?;
    let mut out = args[..2].to_vec();
    out.extend(flags.into_iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
