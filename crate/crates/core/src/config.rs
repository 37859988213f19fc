//! Plain-text `key = value` experiment configuration.
//!
//! ```text
//! # default protocol with a smaller sweep
//! n_grid = 50:150:10
//! reps = 3
//! ```
//!
//! Recognized keys: `p`, `n_nonzero`, `beta_low`, `beta_high`, `snr`,
//! `n_grid` (either `start:stop:step`, inclusive, or a comma-separated list),
//! `reps`, `test_size`, `k_folds`, `pool_size`, `master_seed`. Missing keys
//! take the [`SimConfig::default`] values.

use std::collections::HashSet;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::simulation::SimConfig;

pub fn parse_config(text: &str) -> Result<SimConfig> {
    let mut config = SimConfig::default();
    let mut seen = HashSet::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_error = |message: String| Error::ParseError { line: line_no, message };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(parse_error(format!("duplicate key `{key}`")));
        }
        match key {
            "p" => config.p = number(value, line_no)?,
            "n_nonzero" => config.n_nonzero = number(value, line_no)?,
            "beta_low" => config.beta_low = number(value, line_no)?,
            "beta_high" => config.beta_high = number(value, line_no)?,
            "snr" => config.snr = number(value, line_no)?,
            "n_grid" => config.n_grid = parse_grid(value, line_no)?,
            "reps" => config.reps = number(value, line_no)?,
            "test_size" => config.test_size = number(value, line_no)?,
            "k_folds" => config.k_folds = number(value, line_no)?,
            "pool_size" => config.pool_size = number(value, line_no)?,
            "master_seed" => config.master_seed = number(value, line_no)?,
            other => return Err(parse_error(format!("unknown key `{other}`"))),
        }
    }
    config.validate()?;
    Ok(config)
}

fn number<T: FromStr>(value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::ParseError {
        line,
        message: format!("cannot parse `{value}`"),
    })
}

fn parse_grid(value: &str, line: usize) -> Result<Vec<usize>> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::ParseError {
                line,
                message: format!("range must be start:stop:step, got `{value}`"),
            });
        }
        let start: usize = number(parts[0], line)?;
        let stop: usize = number(parts[1], line)?;
        let step: usize = number(parts[2], line)?;
        if step == 0 || stop < start {
            return Err(Error::validation("n_grid", format!("empty range `{value}`")));
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        value
            .split(',')
            .map(|v| number(v.trim(), line))
            .collect()
    }
}
