//! Compare multinomial and systematic resampling on one skewed weight
//! vector: offspring counts, effective sample size and surviving ancestors.
//!
//! ```text
//! cargo run --example resampling
//! ```

use sirpf::filter::{ess, normalize, unique_ancestor_count};
use sirpf::{RandomStream, Resampler};

fn main() -> anyhow::Result<()> {
    let mut weights: Vec<f64> = (1..=10).map(|i| f64::from(i).powi(3)).collect();
    normalize(&mut weights)?;
    let n = weights.len();
    println!("ess {:.3} of {n}", ess(&weights));

    let mut stream = RandomStream::new(11);
    for scheme in [Resampler::Multinomial, Resampler::Systematic] {
        let idx = scheme.resample(&weights, n, &mut stream);
        let mut counts = vec![0usize; n];
        for &i in &idx {
            counts[i] += 1;
        }
        println!(
            "{:>11}: counts {counts:?}, unique ancestors {}",
            scheme.name(),
            unique_ancestor_count(&idx)
        );
    }
    let expected: Vec<String> = weights
        .iter()
        .map(|w| format!("{:.2}", w * n as f64))
        .collect();
    println!("   expected: [{}]", expected.join(", "));

    let trials = 10_000;
    for scheme in [Resampler::Multinomial, Resampler::Systematic] {
        let mut var = 0.0;
        for _ in 0..trials {
            let idx = scheme.resample(&weights, n, &mut stream);
            let top = idx.iter().filter(|&&i| i == n - 1).count() as f64;
            var += (top - weights[n - 1] * n as f64).powi(2);
        }
        println!(
            "{:>11}: variance of heaviest-particle count {:.4}",
            scheme.name(),
            var / trials as f64
        );
    }
    Ok(())
}
