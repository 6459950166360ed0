use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::math::{mean, sqrt};
use crate::{Error, Result};

/// One metric measured over R independent runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeries {
    pub metric: String,
    pub per_run_values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation (divides by R).
    pub sigma: f64,
    /// Bessel-corrected standard deviation (divides by R - 1); absent for R = 1.
    pub sample_sigma: Option<f64>,
}

impl RunSeries {
    pub fn new(metric: impl Into<String>, per_run_values: Vec<f64>) -> Result<Self> {
        if per_run_values.is_empty() {
            return Err(Error::InvalidSeries("no runs".into()));
        }
        let r = per_run_values.len() as f64;
        // shifted by the first run so identical runs give exactly zero spread
        let shift = per_run_values[0];
        let deltas: Vec<f64> = per_run_values.iter().map(|v| v - shift).collect();
        let offset = mean(&deltas);
        let ss: f64 = deltas.iter().map(|d| (d - offset) * (d - offset)).sum();
        let mean = shift + offset;
        Ok(Self {
            metric: metric.into(),
            sigma: sqrt(ss / r),
            sample_sigma: (per_run_values.len() > 1).then(|| sqrt(ss / (r - 1.0))),
            mean,
            per_run_values,
        })
    }
}

/// `runs[r][m]` is metric `m` in run `r`; one series per metric.
pub fn inter_run_stats<S: AsRef<str>>(metrics: &[S], runs: &[Vec<f64>]) -> Result<Vec<RunSeries>> {
    if runs.is_empty() {
        return Err(Error::InvalidSeries("no runs".into()));
    }
    if let Some(bad) = runs.iter().position(|r| r.len() != metrics.len()) {
        return Err(Error::InvalidSeries(alloc::format!(
            "run {bad} has {} values, expected {}",
            runs[bad].len(),
            metrics.len()
        )));
    }
    metrics
        .iter()
        .enumerate()
        .map(|(m, name)| RunSeries::new(name.as_ref(), runs.iter().map(|r| r[m]).collect()))
        .collect()
}
