//! Direct roughening (inflated propagation variance) against the
//! separate-jitter variant with the same total added variance.
//!
//! ```text
//! cargo run --release --example separate_roughening -- [trials] [seed]
//! ```

use sirpf::experiments::run_trials;
use sirpf::{CampaignConfig, FilterConfig, Roughening};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().map(|s| s.parse()).transpose()?.unwrap_or(50);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);

    println!(
        "{:>9} {:>6} {:>7} {:>8} {:>8} {:>7}",
        "mode", "q_prop", "sigma_r", "rmse", "se", "uniq"
    );
    for n_particles in [20, 50] {
        let variants = [
            (Roughening::Direct, 1.0, 0.0),
            (Roughening::Direct, 1.5, 0.0),
            (Roughening::Separate, 1.0, 0.5),
        ];
        println!("N = {n_particles}");
        for (roughening, q_prop, sigma_r) in variants {
            let campaign = CampaignConfig {
                trials,
                horizon: 500,
                master_seed: seed,
                filter: FilterConfig {
                    n_particles,
                    q_prop,
                    roughening,
                    sigma_r,
                    ..FilterConfig::default()
                },
                ..CampaignConfig::default()
            };
            let s = run_trials(&campaign)?;
            println!(
                "{:>9} {:>6.1} {:>7.1} {:>8.4} {:>8.4} {:>7.3}",
                roughening.name(),
                q_prop,
                sigma_r,
                s.mean_rmse,
                s.se_rmse,
                s.mean_unique_frac
            );
        }
    }
    Ok(())
}
