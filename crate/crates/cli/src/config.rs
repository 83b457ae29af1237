//! Key-value configuration files.
//!
//! Grammar: one `key = value` per line, `#` starts a comment, blank lines
//! ignored. Keys are long flag names without the leading `--` (e.g.
//! `model = C`, `n = 3`, `t-end = 1.25`). Entries are spliced in as defaults;
//! flags given on the command line override them.

use std::path::{Path, PathBuf};

pub fn load(path: &Path) -> Result<Vec<(String, String)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config {}, line {}: expected `key = value`", path.display(), idx + 1))?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(format!("config {}, line {}: bad key `{key}`", path.display(), idx + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Extracts the `--config PATH` value from raw arguments without a full parse.
pub fn config_path_from(raw: &[String]) -> Option<PathBuf> {
    let mut iter = raw.iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            return iter.next().map(PathBuf::from);
        }
        if let Some(v) = arg.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Splices config entries as defaults directly after the subcommand token;
/// explicitly passed flags win because clap lets later occurrences override
/// earlier ones for single-value arguments... which it does not by default,
/// so entries whose flag is already present are skipped instead.
pub fn splice_defaults(raw: &mut Vec<String>, entries: Vec<(String, String)>) {
    // Find the subcommand position: first non-flag token after the binary
    // name that is not a value of `--config`.
    let mut pos = None;
    let mut i = 1;
    while i < raw.len() {
        let a = &raw[i];
        if a == "--config" {
            i += 2;
            continue;
        }
        if a.starts_with("--") {
            i += 1;
            continue;
        }
        pos = Some(i);
        break;
    }
    let Some(sub_at) = pos else {
        return;
    };
    let mut insert_at = sub_at + 1;
    for (key, value) in entries {
        let flag = format!("--{key}");
        let already = raw.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if already {
            continue;
        }
        if value.is_empty() {
            raw.insert(insert_at, flag);
            insert_at += 1;
        } else {
            raw.insert(insert_at, flag);
            raw.insert(insert_at + 1, value);
            insert_at += 2;
        }
    }
}
