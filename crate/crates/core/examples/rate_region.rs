//! Sweeps the three schemes for one channel case, extracts Pareto frontiers and
//! checks containment at one grid step.
//!
//!     cargo run --release --example rate_region -- 0.25

use semnoma::access::{DownlinkScenario, SchemeKind};
use semnoma::channel::{LinkGain, NoiseModel};
use semnoma::rates::SemanticTextModel;
use semnoma::region::{region_dominates, sweep_frontier, RegionSweepConfig};

fn main() -> semnoma::Result<()> {
    let ratio: f64 = std::env::args()
        .nth(1)
        .map_or(1.0, |s| s.parse().expect("gain ratio"));
    let scn = DownlinkScenario::new(
        LinkGain::new(ratio)?,
        LinkGain::new(1.0)?,
        1.0,
        1e6,
        NoiseModel::new(1e-9)?,
        SemanticTextModel::default(),
    )?;
    let cfg = RegionSweepConfig::default();
    let frontiers = SchemeKind::ALL
        .iter()
        .map(|&s| sweep_frontier(&scn, s, &cfg))
        .collect::<semnoma::Result<Vec<_>>>()?;
    for f in &frontiers {
        println!(
            "{:>10}: {:>4} frontier points, max {:.0} suts/s, max {:.0} bits/s",
            f.scheme.map_or("", SchemeKind::label),
            f.points().len(),
            f.max_semantic(),
            f.max_bit()
        );
    }
    let semi = &frontiers[2];
    let step = cfg.cell_step(semi.max_semantic(), semi.max_bit());
    for inner in &frontiers[..2] {
        println!(
            "semi-noma contains {}: {}",
            inner.scheme.map_or("", SchemeKind::label),
            region_dominates(semi, inner, step)
        );
    }
    // Bit rate each scheme sustains at half the semantic ceiling.
    let s = 0.5 * scn.semantic.semantic_ceiling(scn.total_bandwidth);
    for f in &frontiers {
        let b = f.max_bit_at(s).unwrap_or(0.0);
        println!(
            "at {s:.0} suts/s {:>10} keeps {b:.0} bits/s",
            f.scheme.map_or("", SchemeKind::label)
        );
    }
    Ok(())
}
