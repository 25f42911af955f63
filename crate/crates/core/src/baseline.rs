//! Erdős–Rényi random graph `G(n, p)` as the mean-field reference.

use serde::{Deserialize, Serialize};

use crate::error::{PercError, Result};
use crate::parallel::map_samples;
use crate::rng::{tags, RandomStream};
use crate::stats::{Estimate, QuantileAccumulator, QuantileSummary, DEFAULT_PROBS};
use crate::union_find::DisjointSets;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ERSpec {
    pub n: u64,
    pub p: f64,
}

impl ERSpec {
    pub fn new(n: u64, p: f64) -> Result<Self> {
        if n == 0 || n > u32::MAX as u64 {
            return Err(PercError::InvalidArgument(format!(
                "vertex count {n} out of range"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(PercError::InvalidArgument(format!(
                "p = {p} is not a probability"
            )));
        }
        Ok(ERSpec { n, p })
    }

    /// `p = (1 + eps) / n`, clamped to `[0, 1]`.
    pub fn scaled(n: u64, eps: f64) -> Result<Self> {
        Self::new(n, ((1.0 + eps) / n as f64).clamp(0.0, 1.0))
    }

    pub fn pair_count(&self) -> u64 {
        self.n * (self.n - 1) / 2
    }
}

/// Largest component of one sample, visiting only the occupied pairs by
/// geometric jumps through the pair sequence `(0,1), (0,2), ..., (n-2,n-1)`.
pub fn er_sample_cmax(spec: &ERSpec, stream: &RandomStream) -> u64 {
    let n = spec.n;
    if spec.p <= 0.0 || n == 1 {
        return 1;
    }
    let mut ds = DisjointSets::new(n as usize);
    let total = spec.pair_count();
    let log_q = (-spec.p).ln_1p();
    let mut row = 0u64;
    let mut row_start = 0u64;
    let mut idx = 0u64;
    let mut jump = 0u64;
    loop {
        let u = stream.aux_uniform(tags::ER_JUMP, &[jump]);
        jump += 1;
        let skip = ((-u).ln_1p() / log_q).floor();
        if !(skip < (total - idx) as f64) {
            break;
        }
        idx += skip as u64;
        while idx >= row_start + (n - 1 - row) {
            row_start += n - 1 - row;
            row += 1;
        }
        let col = row + 1 + (idx - row_start);
        ds.union(row as usize, col as usize);
        idx += 1;
        if idx >= total {
            break;
        }
    }
    ds.set_sizes().max().unwrap_or(1)
}

/// Largest component of one sample, testing every pair independently.
pub fn er_sample_cmax_naive(spec: &ERSpec, stream: &RandomStream) -> u64 {
    let n = spec.n as usize;
    let mut ds = DisjointSets::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if stream.aux_uniform(tags::ER_PAIR, &[i as u64, j as u64]) < spec.p {
                ds.union(i, j);
            }
        }
    }
    ds.set_sizes().max().unwrap_or(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ERRecord {
    pub n: u64,
    pub epsilon: f64,
    pub p: f64,
    pub samples: u64,
    pub cmax: QuantileSummary,
    /// Quantiles of `|C_max| n^{-2/3}`.
    pub scaled: QuantileSummary,
    pub cmax_mean: Estimate,
}

pub fn er_cmax_samples(spec: &ERSpec, samples: u64, seed: u64) -> Vec<u64> {
    map_samples(samples, |i| {
        er_sample_cmax(spec, &RandomStream::new(seed, i))
    })
}

/// Largest-component quantiles at `p = (1 + eps)/n` for each `n`.
pub fn er_scaling_experiment(
    n_list: &[u64],
    epsilon: f64,
    samples: u64,
    seed: u64,
) -> Result<Vec<ERRecord>> {
    if samples < 2 {
        return Err(PercError::InvalidArgument("need at least 2 samples".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let spec = ERSpec::scaled(n, epsilon)?;
            let values = er_cmax_samples(&spec, samples, seed);
            let scale = (n as f64).powf(-2.0 / 3.0);
            let mut q = QuantileAccumulator::new();
            let mut qs = QuantileAccumulator::new();
            let f: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            for &v in &f {
                q.push(v);
                qs.push(v * scale);
            }
            Ok(ERRecord {
                n,
                epsilon,
                p: spec.p,
                samples,
                cmax: q.summary(&DEFAULT_PROBS),
                scaled: qs.summary(&DEFAULT_PROBS),
                cmax_mean: Estimate::from_values(&f),
            })
        })
        .collect()
}
