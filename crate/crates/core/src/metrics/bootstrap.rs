//! Percentile bootstrap with a seeded generator.

use alloc::string::String;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::math::{ceil, floor, mean};
use crate::{Error, Result};

pub const DEFAULT_ITERATIONS: usize = 1000;
pub const DEFAULT_LEVEL: f64 = 0.95;

/// Percentile interval of `statistic` over `iterations` resamples of
/// `n` indices drawn with replacement.
pub fn bootstrap_statistic_ci<F>(
    n: usize,
    iterations: usize,
    level: f64,
    seed: u64,
    mut statistic: F,
) -> Result<(f64, f64)>
where
    F: FnMut(&[usize]) -> f64,
{
    if n == 0 {
        return Err(Error::InvalidSeries("bootstrap needs at least one value".into()));
    }
    if iterations == 0 || !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(
            "bootstrap needs iterations >= 1 and level in (0, 1)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = alloc::vec![0usize; n];
    let mut stats: Vec<f64> = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        for slot in indices.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        stats.push(statistic(&indices));
    }
    stats.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    // the 1e-9 guards against 0.025 * 1000 landing a hair above an integer
    let lo = (floor(tail * iterations as f64 + 1e-9) as usize).min(iterations - 1);
    let hi = (ceil((1.0 - tail) * iterations as f64 - 1e-9) as usize)
        .saturating_sub(1)
        .min(iterations - 1);
    Ok((stats[lo], stats[hi.max(lo)]))
}

/// Percentile CI of the mean of `values`.
pub fn bootstrap_ci(values: &[f64], iterations: usize, level: f64, seed: u64) -> Result<(f64, f64)> {
    bootstrap_statistic_ci(values.len(), iterations, level, seed, |idx| {
        idx.iter().map(|&i| values[i]).sum::<f64>() / idx.len() as f64
    })
}

/// A reported metric with an optional confidence interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricPoint {
    pub name: String,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_low: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ci_high: Option<f64>,
    pub n: usize,
    /// Decimal places used when rendering.
    #[serde(default = "default_decimals")]
    pub decimals: u8,
}

fn default_decimals() -> u8 {
    3
}

impl MetricPoint {
    pub fn point(name: impl Into<String>, value: f64, n: usize) -> Self {
        Self {
            name: name.into(),
            value,
            ci_low: None,
            ci_high: None,
            n: n.max(1),
            decimals: default_decimals(),
        }
    }

    /// Attach an interval, widened if needed so it always brackets `value`.
    pub fn with_ci(mut self, (low, high): (f64, f64)) -> Self {
        self.ci_low = Some(low.min(self.value));
        self.ci_high = Some(high.max(self.value));
        self
    }

    pub fn with_decimals(mut self, decimals: u8) -> Self {
        self.decimals = decimals;
        self
    }

    /// Mean of `values` with its default 1000-iteration 95% interval.
    pub fn mean_with_ci(name: impl Into<String>, values: &[f64], seed: u64) -> Result<Self> {
        let ci = bootstrap_ci(values, DEFAULT_ITERATIONS, DEFAULT_LEVEL, seed)?;
        Ok(Self::point(name, mean(values), values.len()).with_ci(ci))
    }
}
