//! The bootstrap filter on a scalar linear-Gaussian model, where the exact
//! posterior mean is available from a Kalman filter. The gap shrinks as the
//! particle count grows.
//!
//! ```text
//! cargo run --release --example linear_gaussian -- [seed]
//! ```

use sirpf::experiments::simulate_trajectory;
use sirpf::filter::run_filter;
use sirpf::{FilterConfig, LinearGaussian, RandomStream, StateSpaceModel};

fn kalman(model: &LinearGaussian, ys: &[f64]) -> Vec<f64> {
    let p0 = model.params();
    let (mut m, mut p) = (p0.x0, p0.init_var);
    ys.iter()
        .map(|y| {
            let mp = model.a * m;
            let pp = model.a * model.a * p + p0.q_true;
            let s = model.c * model.c * pp + p0.r;
            let gain = pp * model.c / s;
            m = mp + gain * (y - model.c * mp);
            p = (1.0 - gain * model.c) * pp;
            m
        })
        .collect()
}

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(5);
    let model = LinearGaussian::default();
    let q = model.params().q_true;
    let traj = simulate_trajectory(&model, q, 100, &mut RandomStream::new(seed))?;
    let exact = kalman(&model, &traj.observations);

    println!("{:>6} {:>10}", "N", "mean |pf - kf|");
    for n_particles in [10, 50, 200, 1000, 5000] {
        let config = FilterConfig {
            n_particles,
            q_prop: q,
            ..FilterConfig::default()
        };
        let out = run_filter(
            &model,
            &config,
            &traj.observations,
            &mut RandomStream::new(seed + 1),
        )?;
        let gap = out
            .estimates
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / exact.len() as f64;
        println!("{n_particles:>6} {gap:>10.4}");
    }
    Ok(())
}
