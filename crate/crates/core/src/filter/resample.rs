//! Resampling schemes and ancestry diagnostics.

use crate::error::{Error, Result};
use crate::sampling::RandomStream;

/// Running sum of `weights`. The last entry is the total mass.
fn cumulative(weights: &[f64]) -> Vec<f64> {
    weights
        .iter()
        .scan(0.0, |acc, &w| {
            *acc += w;
            Some(*acc)
        })
        .collect()
}

/// Index of the last strictly positive weight, used when round-off leaves
/// the cumulative total slightly below a search position.
fn last_positive(weights: &[f64]) -> usize {
    weights
        .iter()
        .rposition(|&w| w > 0.0)
        .unwrap_or(weights.len() - 1)
}

/// Maps a position in `[0, total)` to the first index whose cumulative
/// weight exceeds it.
#[inline]
fn locate(cdf: &[f64], position: f64, fallback: usize) -> usize {
    let i = cdf.partition_point(|&c| c <= position);
    if i >= cdf.len() {
        fallback
    } else {
        i
    }
}

/// `n_out` i.i.d. categorical draws with probabilities `weights`. Consumes
/// exactly `n_out` uniforms from the stream.
pub fn multinomial_resample(
    weights: &[f64],
    n_out: usize,
    stream: &mut RandomStream,
) -> Vec<usize> {
    if weights.is_empty() {
        return Vec::new();
    }
    let cdf = cumulative(weights);
    let fallback = last_positive(weights);
    (0..n_out)
        .map(|_| locate(&cdf, stream.uniform(), fallback))
        .collect()
}

/// Systematic resampling with a single offset `u ∈ [0, 1)`: positions
/// `(j + u) / n_out` are pushed through the cumulative weights. Index `i`
/// appears either `floor(n_out·w_i)` or `ceil(n_out·w_i)` times, and the
/// output is sorted.
pub fn systematic_resample(weights: &[f64], n_out: usize, u: f64) -> Result<Vec<usize>> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::invalid(format!(
            "systematic offset must lie in [0, 1), got {u}"
        )));
    }
    if weights.is_empty() {
        return Ok(Vec::new());
    }
    let fallback = last_positive(weights);
    let step = 1.0 / n_out as f64;
    let mut out = Vec::with_capacity(n_out);
    let mut i = 0;
    let mut cum = weights[0];
    for j in 0..n_out {
        let position = (j as f64 + u) * step;
        while cum <= position && i + 1 < weights.len() {
            i += 1;
            cum += weights[i];
        }
        out.push(if cum <= position { fallback } else { i });
    }
    Ok(out)
}

/// Number of distinct ancestors in a resampling index array.
pub fn unique_ancestor_count(indices: &[usize]) -> usize {
    let Some(&max) = indices.iter().max() else {
        return 0;
    };
    let mut seen = vec![false; max + 1];
    let mut count = 0;
    for &i in indices {
        if !seen[i] {
            seen[i] = true;
            count += 1;
        }
    }
    count
}
