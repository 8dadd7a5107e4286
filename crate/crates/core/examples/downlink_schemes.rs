//! Evaluates one power split under OMA, NOMA and a semi-NOMA allocation, and
//! shows the SIC bottleneck on the shared sub-band.
//!
//!     cargo run --example downlink_schemes

use semnoma::access::{
    evaluate_noma, evaluate_oma, evaluate_semi_noma_detailed, Allocation, DownlinkScenario,
};
use semnoma::channel::{LinkGain, NoiseModel};
use semnoma::rates::SemanticTextModel;

fn main() -> semnoma::Result<()> {
    let scn = DownlinkScenario::new(
        LinkGain::new(1.0)?,
        LinkGain::new(1.0)?,
        1.0,
        1e6,
        NoiseModel::new(1e-9)?,
        SemanticTextModel::default(),
    )?;
    println!(
        "interference-free bit rate: {:.0} bits/s",
        scn.interference_free_bit_rate()
    );

    let oma = evaluate_oma(&scn, 0.5, 0.5, 0.5)?;
    let noma = evaluate_noma(&scn, 0.2, 0.8)?;
    println!(
        "OMA  alpha=0.5, 0.5 W each:  {:>9.0} suts/s {:>10.0} bits/s",
        oma.semantic, oma.bit
    );
    println!(
        "NOMA 0.2 W / 0.8 W:          {:>9.0} suts/s {:>10.0} bits/s",
        noma.semantic, noma.bit
    );

    let alloc = Allocation {
        shared_band_fraction: 0.3,
        semantic_power: 0.2,
        bit_power_shared: 0.3,
        bit_power_orth: 0.5,
    };
    let d = evaluate_semi_noma_detailed(&scn, &alloc)?;
    println!(
        "semi-NOMA alpha=0.3:         {:>9.0} suts/s {:>10.0} bits/s (shared {:.0} + orthogonal {:.0})",
        d.semantic,
        d.shared_bit + d.orth_bit,
        d.shared_bit,
        d.orth_bit
    );
    println!(
        "shared bit SINR at B-user {:.3}, at S-user {:.3}",
        d.shared_sinr_b, d.shared_sinr_s
    );
    Ok(())
}
