//! Test-only reference implementations, kept independent of the library's
//! filtering code.

#![allow(dead_code)]

/// Exact posterior means of the scalar linear-Gaussian model
/// `x_k = a·x_{k-1} + w`, `y_k = c·x_k + v`, `w ~ N(0, q)`, `v ~ N(0, r)`,
/// with prior `x_0 ~ N(m0, p0)`.
pub fn kalman_means(a: f64, c: f64, q: f64, r: f64, m0: f64, p0: f64, ys: &[f64]) -> Vec<f64> {
    let mut m = m0;
    let mut p = p0;
    ys.iter()
        .map(|&y| {
            m *= a;
            p = a * a * p + q;
            let s = c * c * p + r;
            let gain = p * c / s;
            m += gain * (y - c * m);
            p *= 1.0 - gain * c;
            m
        })
        .collect()
}

pub fn mean_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// Chi-square goodness-of-fit statistic of `counts` against
/// `probabilities · total`. Categories with zero probability are skipped.
pub fn chi_square_statistic(counts: &[usize], probabilities: &[f64]) -> (f64, usize) {
    let total: usize = counts.iter().sum();
    let mut stat = 0.0;
    let mut categories = 0usize;
    for (&c, &p) in counts.iter().zip(probabilities) {
        if p > 0.0 {
            let expected = p * total as f64;
            stat += (c as f64 - expected).powi(2) / expected;
            categories += 1;
        }
    }
    (stat, categories.saturating_sub(1))
}
