//! Tabulated complex time series read from `t,re[,im]` CSV files.

use std::path::Path;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Behaviour of [`Table::interpolate`] outside the sampled range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extrapolation {
    Zero,
    /// Hold the nearest endpoint value.
    Clamp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    times: Vec<f64>,
    values: Vec<C64>,
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                got: values.len(),
            });
        }
        if times.len() < 2 {
            return Err(Error::invalid("table", "need at least two samples"));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid(
                "table",
                "sample times must be finite and strictly increasing",
            ));
        }
        Ok(Table { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn scaled(&self, factor: f64) -> Table {
        Table {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Piecewise-linear interpolation.
    pub fn interpolate(&self, t: f64, outside: Extrapolation) -> C64 {
        let (a, b) = self.range();
        if t < a || t > b {
            return match outside {
                Extrapolation::Zero => C64::new(0.0, 0.0),
                Extrapolation::Clamp if t < a => self.values[0],
                Extrapolation::Clamp => self.values[self.values.len() - 1],
            };
        }
        let i = self.times.partition_point(|&x| x <= t);
        if i == 0 {
            return self.values[0];
        }
        if i >= self.times.len() {
            return self.values[self.values.len() - 1];
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        if w == 0.0 {
            return self.values[i - 1];
        }
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }

    /// Trapezoid quadrature of `|value|²` over the sample knots.
    pub fn norm_squared(&self) -> f64 {
        self.times
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].norm_sqr() + v[1].norm_sqr()))
            .sum()
    }

    /// Reads a CSV with a header row and either `t,re` or `t,re,im` columns.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let table_err = |reason: String| Error::Table {
            path: path.to_path_buf(),
            reason,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| table_err(e.to_string()))?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| table_err(e.to_string()))?;
            let field = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| {
                        table_err(format!("row {}: missing column {}", line + 2, i + 1))
                    })?
                    .parse::<f64>()
                    .map_err(|e| table_err(format!("row {}: {e}", line + 2)))
            };
            let (t, re, im) = match record.len() {
                2 => (field(0)?, field(1)?, 0.0),
                3 => (field(0)?, field(1)?, field(2)?),
                n => {
                    return Err(table_err(format!(
                        "row {}: expected 2 or 3 columns, got {n}",
                        line + 2
                    )))
                }
            };
            times.push(t);
            values.push(C64::new(re, im));
        }
        Table::new(times, values).map_err(|e| table_err(e.to_string()))
    }
}
