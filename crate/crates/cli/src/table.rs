use std::fmt::Write as _;
use std::path::Path;

use crate::{CliError, Result};

pub const HEADER: &str = "x,estimate,std_error,gamma,technique,n_samples,shots,seed";

/// One CSV row. Analytic rows carry `n_samples = 0` and `shots = "analytic"`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub x: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub gamma: f64,
    pub technique: String,
    pub n_samples: usize,
    pub shots: String,
    pub seed: u64,
}

impl Row {
    pub fn analytic(x: f64, estimate: f64, std_error: f64, gamma: f64, technique: &str) -> Self {
        Self {
            x,
            estimate,
            std_error,
            gamma,
            technique: technique.to_string(),
            n_samples: 0,
            shots: "analytic".into(),
            seed: 0,
        }
    }

    pub fn sampled(x: f64, technique: &str, r: &nepec::EstimatorResult, seed: u64) -> Self {
        Self {
            x,
            estimate: r.estimate,
            std_error: r.std_error,
            gamma: r.gamma,
            technique: technique.to_string(),
            n_samples: r.n_samples,
            shots: r.shots.to_string(),
            seed,
        }
    }
}

/// Twelve significant digits, shortest round-trip form of that value.
pub fn format_float(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{v:.11e}").parse().expect("formatted float parses");
    if rounded.abs() < 1e-5 || rounded.abs() >= 1e16 {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<Row>,
}

impl ResultTable {
    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }

    pub fn rows_for<'a>(&'a self, technique: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.technique == technique)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            if ![r.x, r.estimate, r.std_error, r.gamma].iter().all(|v| v.is_finite()) {
                return Err(CliError::Numerical(format!("non-finite value in {} row at x = {}", r.technique, r.x)));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                format_float(r.x),
                format_float(r.estimate),
                format_float(r.std_error),
                format_float(r.gamma),
                r.technique,
                r.n_samples,
                r.shots,
                r.seed
            )
            .expect("writing to a String");
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))
    }
}
