//! Defaults, optionally overridden by a key=value file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::args::Format;
use crate::error::CliError;

const KEYS: &[&str] = &[
    "samples",
    "seed",
    "format",
    "threads",
    "grid-start",
    "grid-end",
    "grid-points",
    "tolerance",
    "window",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Defaults {
    pub samples: u64,
    pub seed: u64,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    pub grid_start: f64,
    pub grid_end: f64,
    pub grid_points: usize,
    pub tolerance: f64,
    pub window: usize,
}

impl Default for Defaults {
    fn default() -> Self {
        Defaults {
            samples: wvpower::experiments::DEFAULT_SAMPLES,
            seed: 0,
            format: None,
            threads: None,
            grid_start: 0.505,
            grid_end: 0.995,
            grid_points: 99,
            tolerance: 1e-9,
            window: 5,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config: bad value {value:?} for {key}")))
}

impl Defaults {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let mut d = Defaults::default();
        let Some(path) = path else {
            return Ok(d);
        };
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Io(e, path.display().to_string()))?;
        for (key, value) in parse_pairs(&text)? {
            match key.as_str() {
                "samples" => d.samples = parse(&key, &value)?,
                "seed" => d.seed = parse(&key, &value)?,
                "format" => {
                    d.format = Some(match value.as_str() {
                        "csv" => Format::Csv,
                        "json" => Format::Json,
                        _ => {
                            return Err(CliError::Usage(format!(
                                "config: unknown format {value:?}"
                            )))
                        }
                    })
                }
                "threads" => d.threads = Some(parse(&key, &value)?),
                "grid-start" => d.grid_start = parse(&key, &value)?,
                "grid-end" => d.grid_end = parse(&key, &value)?,
                "grid-points" => d.grid_points = parse(&key, &value)?,
                "tolerance" => d.tolerance = parse(&key, &value)?,
                "window" => d.window = parse(&key, &value)?,
                _ => unreachable!(),
            }
        }
        Ok(d)
    }
}

/// `key = value` lines; `#` starts a comment.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key {k:?}",
                i + 1
            )));
        }
        out.insert(k, v.trim().to_owned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        let m = parse_pairs("# c\nsamples = 10\n\nseed=3 # x\ngrid_points=5\n").unwrap();
        assert_eq!(m["samples"], "10");
        assert_eq!(m["seed"], "3");
        assert_eq!(m["grid-points"], "5");
        assert!(parse_pairs("bogus=1").is_err());
        assert!(parse_pairs("samples").is_err());
    }
}
