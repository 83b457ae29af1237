//! Loader for the versioned plain-text model data files.
//!
//! One file per model, embedded in the crate (also present under
//! `crates/core/data/`). Format, line oriented:
//!
//! ```text
//! # comment
//! format = 1
//! model = A
//!
//! [einstein]          # second-order system, x_i = f_i, y_i = f_i'
//! g1 = <expr>
//! ...
//! [ivp0] / [ivp1]     # singular IVPs: a1.., b1.., c1.., x0_1..
//! ...
//! [constraint]        # model B only: n1 = non-diagonal residual
//! ```
//!
//! Expressions use the grammar of [`crate::expr::parse_expr`]; parse errors
//! report model, line and column.

use super::{ModelError, ModelId, SingularIVP};
use crate::expr::{parse_expr, Expr};

pub const FORMAT_VERSION: u32 = 1;

/// Parsed data file: ordered sections of `key = expr` bindings.
#[derive(Clone, Debug)]
pub struct DataFile {
    pub model: ModelId,
    sections: Vec<(String, Vec<(String, Expr)>)>,
}

impl DataFile {
    pub fn section(&self, name: &str) -> Option<&[(String, Expr)]> {
        self.sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, kv)| kv.as_slice())
    }

    pub fn lookup(&self, section: &str, key: &str) -> Option<&Expr> {
        self.section(section)?
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, e)| e)
    }
}

/// Raw embedded file text for a model.
pub fn raw(id: ModelId) -> &'static str {
    match id {
        ModelId::A => include_str!("../../data/model_a.txt"),
        ModelId::B => include_str!("../../data/model_b.txt"),
        ModelId::C => include_str!("../../data/model_c.txt"),
        ModelId::D => include_str!("../../data/model_d.txt"),
        ModelId::E => include_str!("../../data/model_e.txt"),
    }
}

/// Parses the embedded data file for `id`.
pub fn load(id: ModelId) -> Result<DataFile, ModelError> {
    parse(id, raw(id))
}

/// Parses data-file text; exposed for tests that feed alternative sources.
pub fn parse(id: ModelId, text: &str) -> Result<DataFile, ModelError> {
    let err = |line: usize, msg: String| ModelError::DataFile(format!("model {id} data, line {line}: {msg}"));

    let mut sections: Vec<(String, Vec<(String, Expr)>)> = Vec::new();
    let mut saw_format = false;
    let mut saw_model = false;

    for (idx, raw_line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw_line.find('#') {
            Some(p) => &raw_line[..p],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| err(lineno, "unterminated section header".into()))?
                .trim()
                .to_string();
            if sections.iter().any(|(n, _)| *n == name) {
                return Err(err(lineno, format!("duplicate section [{name}]")));
            }
            sections.push((name, Vec::new()));
            continue;
        }

        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, "expected `key = value`".into()))?;
        let key = key.trim();
        let value = value.trim();

        match key {
            "format" if sections.is_empty() => {
                let v: u32 = value.parse().map_err(|_| err(lineno, "bad format version".into()))?;
                if v != FORMAT_VERSION {
                    return Err(err(lineno, format!("unsupported format version {v}")));
                }
                saw_format = true;
            }
            "model" if sections.is_empty() => {
                let m: ModelId = value.parse().map_err(|e: ModelError| err(lineno, e.to_string()))?;
                if m != id {
                    return Err(err(lineno, format!("file declares model {m}, expected {id}")));
                }
                saw_model = true;
            }
            _ => {
                let Some((_, kv)) = sections.last_mut() else {
                    return Err(err(lineno, format!("key `{key}` outside any section")));
                };
                if kv.iter().any(|(k, _)| k == key) {
                    return Err(err(lineno, format!("duplicate key `{key}`")));
                }
                let expr = parse_expr(value).map_err(|e| err(lineno, format!("in `{key}`: {e}")))?;
                kv.push((key.to_string(), expr));
            }
        }
    }

    if !saw_format {
        return Err(err(0, "missing `format = 1` header".into()));
    }
    if !saw_model {
        return Err(err(0, "missing `model = ...` header".into()));
    }
    Ok(DataFile { model: id, sections })
}

/// Pulls `keys` from `section`, in order, all required.
pub fn section_exprs(file: &DataFile, section: &str, keys: &[&str]) -> Result<Vec<Expr>, ModelError> {
    keys.iter()
        .map(|key| {
            file.lookup(section, key).cloned().ok_or_else(|| {
                ModelError::DataFile(format!(
                    "model {} data: missing `{key}` in section [{section}]",
                    file.model
                ))
            })
        })
        .collect()
}

/// Assembles the singular IVP of `endpoint` from its data-file section.
pub fn ivp_from_file(
    file: &DataFile,
    model: ModelId,
    endpoint: usize,
    s: usize,
    collapse: Vec<bool>,
) -> Result<SingularIVP, ModelError> {
    let section = format!("ivp{endpoint}");
    let mut names: Vec<String> = Vec::new();
    for prefix in ["a", "b", "c"] {
        for i in 1..=s {
            names.push(format!("{prefix}{i}"));
        }
    }
    for i in 1..=s {
        names.push(format!("x0_{i}"));
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut exprs = section_exprs(file, &section, &name_refs)?;

    let x0 = exprs.split_off(3 * s);
    let c = exprs.split_off(2 * s);
    let b = exprs.split_off(s);
    let a = exprs;
    Ok(SingularIVP {
        model,
        endpoint,
        dim: s,
        a,
        b,
        c,
        x0,
        collapse,
    })
}
