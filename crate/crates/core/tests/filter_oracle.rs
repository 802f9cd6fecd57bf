//! Bootstrap filter against the exact Kalman posterior on the
//! linear-Gaussian model, and resampler distribution checks.

mod common;

use common::{chi_square_statistic, kalman_means, mean_abs_diff};
use sirpf::experiments::simulate_trajectory;
use sirpf::filter::{ess, multinomial_resample, normalize, run_filter, systematic_resample};
use sirpf::sampling::derive_trial_seed;
use sirpf::{FilterConfig, LinearGaussian, ModelParams, RandomStream, StateSpaceModel};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn reference_model() -> LinearGaussian {
    LinearGaussian::new(
        0.9,
        1.0,
        ModelParams {
            q_true: 1.0,
            r: 1.0,
            x0: 0.0,
            init_var: 2.0,
        },
    )
}

fn pf_vs_kf(seed: u64, n: usize) -> f64 {
    let model = reference_model();
    let p = *model.params();
    let traj = simulate_trajectory(
        &model,
        p.q_true,
        100,
        &mut RandomStream::new(derive_trial_seed(seed, 0)),
    )
    .unwrap();
    let kf = kalman_means(
        model.a,
        model.c,
        p.q_true,
        p.r,
        p.x0,
        p.init_var,
        &traj.observations,
    );
    let cfg = FilterConfig {
        n_particles: n,
        q_prop: p.q_true,
        ..FilterConfig::default()
    };
    let pf = run_filter(
        &model,
        &cfg,
        &traj.observations,
        &mut RandomStream::new(derive_trial_seed(seed, 1)),
    )
    .unwrap();
    mean_abs_diff(&pf.estimates, &kf)
}

#[test]
fn bootstrap_filter_tracks_kalman_mean() {
    let err = pf_vs_kf(3, 5000);
    assert!(err < 0.1, "time-averaged |PF - KF| = {err}");
}

#[test]
fn kalman_agreement_improves_with_particles() {
    let seeds = 0..5u64;
    let small: f64 = seeds.clone().map(|s| pf_vs_kf(s, 50)).sum::<f64>() / 5.0;
    let large: f64 = seeds.map(|s| pf_vs_kf(s, 5000)).sum::<f64>() / 5.0;
    assert!(
        large < small,
        "N=5000 error {large} not below N=50 error {small}"
    );
}

#[test]
fn multinomial_passes_chi_square() {
    let mut s = RandomStream::new(99);
    let mut w: Vec<f64> = (0..12).map(|_| s.uniform()).collect();
    normalize(&mut w).unwrap();
    let idx = multinomial_resample(&w, 100_000, &mut s);
    let mut counts = vec![0; w.len()];
    for i in idx {
        counts[i] += 1;
    }
    let (stat, df) = chi_square_statistic(&counts, &w);
    let p = 1.0 - ChiSquared::new(df as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat} on {df} dof, p = {p}");
}

#[test]
fn systematic_counts_on_random_vectors() {
    let mut s = RandomStream::new(1234);
    for _ in 0..200 {
        let n = 1 + (s.uniform() * 60.0) as usize;
        let mut w: Vec<f64> = (0..n).map(|_| s.uniform().powi(3)).collect();
        normalize(&mut w).unwrap();
        let idx = systematic_resample(&w, n, s.uniform()).unwrap();
        let mut counts = vec![0usize; n];
        for i in idx {
            counts[i] += 1;
        }
        for (c, wi) in counts.iter().zip(&w) {
            let e = n as f64 * wi;
            assert!(*c as f64 >= e.floor() && *c as f64 <= e.ceil());
        }
        let e = ess(&w);
        assert!((1.0..=n as f64 + 1e-9).contains(&e));
    }
}

#[test]
fn kalman_single_step_by_hand() {
    // Prior N(0, 1) -> predicted N(0, 0.81 + 1), y = 1:
    // gain = 1.81 / 2.81, mean = gain.
    let m = common::kalman_means(0.9, 1.0, 1.0, 1.0, 0.0, 1.0, &[1.0]);
    assert!((m[0] - 1.81 / 2.81).abs() < 1e-15);
}
