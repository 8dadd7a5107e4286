//! One uplink solve: opportunistic mode switching against both pinned modes at
//! a single primary requirement, with the duality-gap certificate.
//!
//!     cargo run --release --example opportunistic_uplink -- 0.5

use semnoma::experiment::{uplink_setup, ExperimentConfig};
use semnoma::opportunistic::{
    evaluate_fixed_mode, silent_primary_rate, solve_dual, CommMode, OpportunisticResult,
};

fn show(r: &OpportunisticResult) {
    let semantic_states = r
        .policy
        .iter()
        .filter(|d| d.power > 0.0 && d.mode == CommMode::Semantic)
        .count();
    let silent = r.policy.iter().filter(|d| d.power == 0.0).count();
    println!(
        "{:>14}: {:>9.0} suts/s, E[p] {:.4} W, primary {:>9.0} bits/s, gap {:.1e}, {} semantic / {} silent states",
        r.strategy.label(),
        r.ergodic_secondary,
        r.avg_power,
        r.ergodic_primary,
        (r.dual_bound - r.ergodic_secondary) / r.ergodic_secondary,
        semantic_states,
        silent
    );
}

fn main() -> semnoma::Result<()> {
    let frac: f64 = std::env::args()
        .nth(1)
        .map_or(0.5, |s| s.parse().expect("fraction of the silent rate"));
    let cfg = ExperimentConfig::load_str("{}", &["uplink.ensemble_size=500".into()])?;
    let (template, ens) = uplink_setup(&cfg)?;
    let cap = silent_primary_rate(&template, &ens);
    let scn = template.with_r_req(frac * cap);
    println!(
        "r_req = {:.0} bits/s ({frac} of the silent-secondary rate)",
        scn.r_req
    );
    show(&solve_dual(&scn, &ens, &cfg.solver)?);
    show(&evaluate_fixed_mode(&scn, &ens, CommMode::Semantic, &cfg.solver)?);
    show(&evaluate_fixed_mode(&scn, &ens, CommMode::Bit, &cfg.solver)?);
    Ok(())
}
