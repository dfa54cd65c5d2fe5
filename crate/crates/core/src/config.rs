//! `key = value` configuration files mirroring the command-line flags.
//!
//! ```text
//! # comments start with '#'
//! alpha = 0.1, 0.5, 1.5
//! levels = 1-3
//! quad_far = 5
//! solver = direct
//! out = results
//! ```

use std::path::{Path, PathBuf};

use crate::study::StudyConfig;
use crate::{BemError, Result};

/// Splits a config text into `(key, value)` pairs, keeping their order.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| BemError::Config(format!("line {}: expected 'key = value'", i + 1)))?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| BemError::Config(format!("{key}: cannot parse '{v}'")))
}

/// Parses `"1,2,3"` or `"1-3"`.
pub fn parse_levels(v: &str) -> Result<Vec<u32>> {
    if let Some((a, b)) = v.split_once('-') {
        let (a, b): (u32, u32) = (number("levels", a.trim())?, number("levels", b.trim())?);
        if a > b {
            return Err(BemError::Config(format!("levels: empty range '{v}'")));
        }
        return Ok((a..=b).collect());
    }
    v.split(',').map(|s| number("levels", s.trim())).collect()
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| number(key, s.trim())).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(BemError::Config(format!("{key}: expected a boolean, got '{v}'"))),
    }
}

/// Applies one setting to `cfg`.
pub fn apply(cfg: &mut StudyConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "alpha" => cfg.alphas = parse_list(key, value)?,
        "beta" => cfg.beta = number(key, value)?,
        "levels" => cfg.levels = parse_levels(value)?,
        "quad_far" | "quad_order_far" => cfg.quad.far_order = number(key, value)?,
        "quad_sing" | "quad_order_sing" => cfg.quad.sing_order = number(key, value)?,
        "quad_inner" => cfg.quad.inner_order = number(key, value)?,
        "near_threshold" => cfg.quad.near_threshold = number(key, value)?,
        "max_depth" => cfg.quad.max_depth = number(key, value)?,
        "solver" => cfg.solve.method = value.parse()?,
        "tol" => cfg.solve.tol = number(key, value)?,
        "max_iter" => cfg.solve.max_iter = number(key, value)?,
        "deterministic" => cfg.deterministic = parse_bool(key, value)?,
        "out" => cfg.out = Some(PathBuf::from(value)),
        "rhs_order" => cfg.rhs_order = number(key, value)?,
        "error_order" => cfg.error_order = number(key, value)?,
        other => return Err(BemError::Config(format!("unknown key '{other}'"))),
    }
    Ok(())
}

/// Reads a config file on top of `cfg`.
pub fn load(cfg: &mut StudyConfig, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    for (k, v) in parse_pairs(&text)? {
        apply(cfg, &k, &v)?;
    }
    cfg.quad.validate()
}
