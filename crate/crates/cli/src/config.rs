//! `key = value` run files. Keys are long flag names without the dashes;
//! `#` starts a comment. Values from the file only fill flags that were not
//! given on the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use clap::Command;

use crate::CliError;

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected key = value", i + 1));
        };
        let key = k.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|m| CliError::Usage(format!("{}: {m}", path.display())))
}

/// Extra arguments that apply the config entries the subcommand understands
/// and the command line left unset (`present` holds the long flags given).
pub fn injected_args(
    cmd: &Command,
    present: &BTreeSet<String>,
    entries: &BTreeMap<String, String>,
) -> Result<Vec<String>, CliError> {
    let mut extra = Vec::new();
    for (key, value) in entries {
        if present.contains(key) || key == "config" {
            continue;
        }
        let Some(arg) = cmd.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            continue;
        };
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                other => return Err(CliError::Usage(format!("config key {key}: expected true or false, got {other}"))),
            }
        }
    }
    Ok(extra)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_dashes() {
        let m = parse("# run\n--n = 3\np=2 # exponent\n\nloglog = true\n").unwrap();
        assert_eq!(m["n"], "3");
        assert_eq!(m["p"], "2");
        assert_eq!(m["loglog"], "true");
        assert!(parse("n 3").is_err());
    }
}
