//! Draws a seeded Rayleigh ensemble and reports empirical gain statistics and
//! the ergodic primary rate with a silent secondary.
//!
//!     cargo run --example fading_ensemble -- 5000 42

use semnoma::channel::{sample_fading, FadingSampler};
use semnoma::experiment::ExperimentConfig;
use semnoma::opportunistic::silent_primary_rate;

fn main() -> semnoma::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(2000, |s| s.parse().expect("state count"));
    let seed: u64 = args.next().map_or(2024, |s| s.parse().expect("seed"));

    let ens = sample_fading(
        &FadingSampler::new(1.0, 0)?,
        &FadingSampler::new(2.0, 1)?,
        n,
        seed,
    )?;
    let mean_p = ens.expectation(|s| s.primary_gain.value());
    let mean_s = ens.expectation(|s| s.secondary_gain.value());
    let deep = ens.expectation(|s| f64::from(u8::from(s.secondary_gain.value() < 0.1)));
    println!("{n} states, seed {seed}");
    println!("mean primary gain {mean_p:.4} (1), mean secondary gain {mean_s:.4} (2)");
    println!(
        "P(secondary gain < 0.1) = {deep:.4}, exact {:.4}",
        1.0 - (-0.05f64).exp()
    );

    let cfg = ExperimentConfig::default();
    let scn = cfg.uplink.scenario(&cfg.semantic, &cfg.conversion)?;
    println!(
        "ergodic primary rate, secondary silent: {:.0} bits/s",
        silent_primary_rate(&scn, &ens)
    );
    Ok(())
}
