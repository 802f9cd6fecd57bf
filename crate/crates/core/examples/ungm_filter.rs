//! Simulate one UNGM trajectory, filter it, and print the scores.
//!
//! ```text
//! cargo run --release --example ungm_filter -- [particles] [q_prop] [seed]
//! ```

use sirpf::experiments::simulate_trajectory;
use sirpf::filter::run_filter;
use sirpf::metrics::{rmsd, rmse};
use sirpf::{FilterConfig, RandomStream, StateSpaceModel, Ungm};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_particles = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let q_prop = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.2);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let model = Ungm::default();
    let q_true = model.params().q_true;
    let traj = simulate_trajectory(&model, q_true, 200, &mut RandomStream::new(seed))?;

    let config = FilterConfig {
        n_particles,
        q_prop,
        ..FilterConfig::default()
    };
    let out = run_filter(
        &model,
        &config,
        &traj.observations,
        &mut RandomStream::new(seed + 1),
    )?;

    println!(
        "{:>4} {:>9} {:>9} {:>9} {:>7} {:>5}",
        "k", "x_true", "y", "x_hat", "ess", "uniq"
    );
    for k in (0..traj.observations.len()).step_by(20) {
        let d = out.diagnostics[k];
        println!(
            "{:>4} {:>9.3} {:>9.3} {:>9.3} {:>7.2} {:>5}",
            k + 1,
            traj.true_states[k],
            traj.observations[k],
            out.estimates[k],
            d.ess,
            d.unique_ancestors
        );
    }
    println!("rmse {:.4}", rmse(&traj.true_states, &out.estimates)?);
    println!(
        "rmsd {:.4}",
        rmsd(&traj.observations, &out.estimates, &model)?
    );
    println!(
        "mean ess {:.2}, mean unique fraction {:.3}",
        out.mean_ess(),
        out.mean_unique_fraction(n_particles)
    );
    println!("underflow steps {}", out.underflow_steps);
    Ok(())
}
