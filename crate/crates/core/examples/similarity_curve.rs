//! Semantic similarity and rate against SNR, next to the equivalent semantic
//! rate of a Shannon bit link on the same bandwidth.
//!
//!     cargo run --example similarity_curve

use semnoma::rates::{bit_rate, BitEquivalence, SemanticTextModel};

fn main() -> semnoma::Result<()> {
    let model = SemanticTextModel::default();
    let conv = BitEquivalence::default();
    let w = 1e6;
    println!("ceiling {:.0} suts/s on {w} Hz", model.semantic_ceiling(w));
    println!(
        "{:>7} {:>10} {:>14} {:>14}",
        "snr_dB", "epsilon", "semantic", "bit-equiv"
    );
    for db in (-10..=40).step_by(5) {
        let snr = 10f64.powf(db as f64 / 10.0);
        let eps = model.similarity(snr)?;
        let sem = model.semantic_rate(w, snr, true)?;
        let bits = conv.to_semantic(bit_rate(w, snr)?, &model);
        println!("{db:>7} {eps:>10.4} {sem:>14.1} {bits:>14.1}");
    }
    Ok(())
}
