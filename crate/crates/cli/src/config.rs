//! `key = value` config files, spliced into the argument list ahead of the
//! real flags so that later (command-line) occurrences win.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`, got {raw:?}", i + 1);
        };
        let key = key.trim();
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        if key == "config" {
            bail!("config line {}: nested config files are not supported", i + 1);
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

fn as_flags(entries: &[(String, String)]) -> Vec<OsString> {
    let mut flags = Vec::new();
    for (key, value) in entries {
        let flag = if key == "B" { "--B".to_string() } else { format!("--{}", key.replace('_', "-")) };
        match value.as_str() {
            "true" => flags.push(flag.into()),
            "false" => {}
            _ => {
                flags.push(flag.into());
                flags.push(value.into());
            }
        }
    }
    flags
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

/// Returns `args` with the config file's entries inserted after the
/// subcommand name.
pub fn expand_args(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path).with_context(|| format!("config: cannot read {}", path.display()))?;
    let flags = as_flags(&parse_config(&text).with_context(|| format!("config: {}", path.display()))?);
    if args.len() < 2 || args[1].to_string_lossy().starts_with('-') {
        return Ok(args);
    }
    let mut out = Vec::with_capacity(args.len() + flags.len());
    out.extend_from_slice(&args[..2]);
    out.extend(flags);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
