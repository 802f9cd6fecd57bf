//! Direct roughening under sample impoverishment.
//!
//! Runs the particle-count sweep: for each particle count, filters compare
//! propagation variances 1.0 (the true value), 1.1, 1.2 and 1.5 on the same
//! simulated UNGM trajectories, and the mean RMSE of each is printed next to
//! the mean effective sample size and the surviving-ancestor fraction.
//!
//! ```text
//! cargo run --release --example roughening_sweep -- [trials] [horizon] [seed]
//! ```

use sirpf::experiments::{sweep_particles, DEFAULT_N_LIST, DEFAULT_Q_LIST};
use sirpf::CampaignConfig;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let horizon = args.next().map(|s| s.parse()).transpose()?.unwrap_or(500);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let campaign = CampaignConfig {
        trials,
        horizon,
        master_seed: seed,
        ..CampaignConfig::default()
    };
    let report = sweep_particles(&campaign, &DEFAULT_N_LIST, &DEFAULT_Q_LIST)?;

    print!("{:>5}", "N");
    for q in DEFAULT_Q_LIST {
        print!("  rmse(q={q:<3})");
    }
    println!("  {:>8} {:>6}", "ess", "uniq");
    for &n in &DEFAULT_N_LIST {
        print!("{n:>5}");
        for q in DEFAULT_Q_LIST {
            let row = report.row_for(n, q).expect("swept");
            print!("  {:>6.3}±{:<5.3}", row.mean_rmse, row.se_rmse);
        }
        let base = report.row_for(n, 1.0).expect("swept");
        println!("  {:>8.2} {:>6.3}", base.mean_ess, base.mean_unique_frac);
    }
    Ok(())
}
