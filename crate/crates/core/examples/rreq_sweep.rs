//! Ergodic secondary rate versus primary requirement for the three strategies,
//! printed as a table.
//!
//!     cargo run --release --example rreq_sweep

use semnoma::experiment::{uplink_setup, ExperimentConfig};
use semnoma::opportunistic::{silent_primary_rate, sweep_rreq, Strategy};

fn main() -> semnoma::Result<()> {
    let cfg = ExperimentConfig::load_str("{}", &["uplink.ensemble_size=500".into()])?;
    let (template, ens) = uplink_setup(&cfg)?;
    let cap = silent_primary_rate(&template, &ens);
    let r_reqs = cfg.sweep.values(cap);
    let sweep = sweep_rreq(&template, &ens, &r_reqs, &cfg.solver)?;

    print!("{:>12}", "r_req");
    for s in Strategy::ALL {
        print!(" {:>14}", s.label());
    }
    println!();
    for (i, r) in sweep.r_req.iter().enumerate() {
        print!("{r:>12.0}");
        for curve in &sweep.curves {
            match &curve.points[i] {
                Some(res) => print!(" {:>14.0}", res.ergodic_secondary),
                None => print!(" {:>14}", "infeasible"),
            }
        }
        println!();
    }
    Ok(())
}
