use rayon::prelude::*;

use super::{solve_strategy, CandidateTable, OpportunisticResult, SolverConfig, Strategy, UplinkScenario};
use crate::channel::FadingEnsemble;
use crate::error::{Error, Result};

/// One strategy's ergodic secondary rate as a function of `r_req`. Infeasible
/// points are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RreqCurve {
    pub strategy: Strategy,
    pub points: Vec<Option<OpportunisticResult>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RreqSweep {
    pub r_req: Vec<f64>,
    /// In [`Strategy::ALL`] order.
    pub curves: Vec<RreqCurve>,
}

impl RreqSweep {
    pub fn curve(&self, strategy: Strategy) -> Option<&RreqCurve> {
        self.curves.iter().find(|c| c.strategy == strategy)
    }
}

/// Solves every strategy at every `r_req` (strictly increasing) on a shared
/// ensemble. The `r_req` field of `template` is ignored.
pub fn sweep_rreq(
    template: &UplinkScenario,
    ensemble: &FadingEnsemble,
    r_reqs: &[f64],
    cfg: &SolverConfig,
) -> Result<RreqSweep> {
    cfg.validate()?;
    if r_reqs.is_empty() {
        return Err(Error::invalid("r_req list is empty"));
    }
    for &r in r_reqs {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::invalid(format!("r_req must be finite and >= 0, got {r}")));
        }
    }
    if let Some(w) = r_reqs.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(format!(
            "r_req values must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }

    // Strategies are independent; each solve is deterministic, so running them
    // concurrently does not change the output.
    let curves = Strategy::ALL
        .par_iter()
        .map(|&strategy| {
            let table = CandidateTable::build(template, ensemble, strategy, cfg.power_grid)?;
            let points = r_reqs
                .iter()
                .map(
                    |&r| match solve_strategy(&table, &template.with_r_req(r), ensemble, cfg) {
                        Ok(res) => Ok(Some(res)),
                        Err(Error::Infeasible { .. }) => Ok(None),
                        Err(e) => Err(e),
                    },
                )
                .collect::<Result<Vec<_>>>()?;
            let curve = RreqCurve { strategy, points };
            check_monotone(&curve, cfg.tol)?;
            Ok(curve)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RreqSweep {
        r_req: r_reqs.to_vec(),
        curves,
    })
}

/// Tightening the primary requirement can never help the secondary user, so
/// converged values must not rise by more than twice the solver tolerance.
fn check_monotone(curve: &RreqCurve, tol: f64) -> Result<()> {
    let solved: Vec<&OpportunisticResult> = curve.points.iter().flatten().filter(|r| r.converged).collect();
    for pair in solved.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b.ergodic_secondary > a.ergodic_secondary + 2.0 * tol * a.ergodic_secondary.abs() {
            return Err(Error::PostCheck(format!(
                "{} curve rises from {} at r_req={} to {} at r_req={}",
                curve.strategy, a.ergodic_secondary, a.r_req, b.ergodic_secondary, b.r_req
            )));
        }
    }
    Ok(())
}
