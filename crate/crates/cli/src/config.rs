//! Configuration files: a TOML table per command whose keys are the long
//! flag names. Keys are spliced into the argument list directly after the
//! subcommand, so explicit flags given later win.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Flags equivalent to the `[command]` section of the file at `path`.
pub fn section_flags(path: &Path, command: &str) -> CliResult<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    section_flags_from_str(&text, command)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn section_flags_from_str(text: &str, command: &str) -> Result<Vec<OsString>, String> {
    let doc: toml::Table = text.parse().map_err(|e: toml::de::Error| e.message().to_string())?;
    let Some(section) = doc.get(command) else {
        return Ok(Vec::new());
    };
    let table = section
        .as_table()
        .ok_or_else(|| format!("[{command}] must be a table"))?;
    let mut out = Vec::new();
    for (key, value) in table {
        if key == "inputs" {
            return Err("input files are given on the command line, not in the config".into());
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|v| scalar(key, v))
                    .collect::<Result<Vec<_>, _>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(key, other)?.into());
            }
        }
    }
    Ok(out)
}

fn scalar(key: &str, v: &toml::Value) -> Result<String, String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        toml::Value::Datetime(d) => Ok(d.to_string()),
        _ => Err(format!("unsupported value for '{key}'")),
    }
}

/// Inserts `extra` after the first occurrence of `command` in `argv`.
pub fn splice(argv: &[OsString], command: &str, extra: Vec<OsString>) -> Vec<OsString> {
    let at = argv
        .iter()
        .enumerate()
        .skip(1)
        .find(|(i, a)| *a == command && argv[i - 1] != "--config")
        .map_or(argv.len(), |(i, _)| i + 1);
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    out
}
