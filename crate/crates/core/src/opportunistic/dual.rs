//! Dual decomposition of the ergodic mode-switching problem.
//!
//! For multipliers `(lambda, nu)` each fading state independently maximizes
//! `u(c) + nu * r(c) - lambda * p(c)` over its candidates `c` (mode x power
//! grid). The dual function
//!
//! ```text
//! g(lambda, nu) = E[max_c u + nu r - lambda p] + lambda p_avg - nu r_req
//! ```
//!
//! upper-bounds the optimum, so `g - f(best feasible policy)` certifies how far
//! the returned policy can be from optimal on the grid.
//!
//! Solve order:
//! 1. projected subgradient on `(lambda, nu)` with steps `step0 / sqrt(t)`,
//!    scaled by the constraint magnitudes, tracking the best exactly feasible
//!    per-state policy and the lowest dual value;
//! 2. if the gap is still open, bisection on `nu` with an inner bisection on
//!    `lambda` (average power is monotone in `lambda`, primary rate in `nu`);
//! 3. if the gap is still open (typical for small ensembles, where the grid
//!    problem has a real duality gap), best-improvement local search from the
//!    best few feasible iterates, using single-state moves and, for small
//!    ensembles, two-state exchanges.

use rayon::prelude::*;

use super::{
    grid_power, primary_rate, silent_primary_rate, utility_unchecked, CommMode, DualVars,
    OpportunisticResult, PolicyDecision, SolverConfig, Strategy, UplinkScenario,
};
use crate::channel::FadingEnsemble;
use crate::error::{Error, Result};

const STATE_CHUNK: usize = 64;
const BISECTION_STEPS: usize = 48;
const MAX_DOUBLINGS: usize = 200;

/// Relative slack on both ergodic constraints. Weights that should sum to one
/// rarely do exactly, so a policy at `p_peak` everywhere with `p_avg = p_peak`
/// would otherwise be rejected.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

/// Feasibility test used by the solver, exposed so exhaustive checks agree with
/// it on boundary cases.
pub fn meets_constraints(avg_power: f64, ergodic_primary: f64, p_avg: f64, r_req: f64) -> bool {
    avg_power <= p_avg * (1.0 + CONSTRAINT_SLACK) && ergodic_primary >= r_req * (1.0 - CONSTRAINT_SLACK)
}

/// Per-state candidate values for one strategy. Candidate `c` uses power
/// index `c / modes.len()` and mode `modes[c % modes.len()]`, so candidates are
/// ordered by power, then by the strategy's mode order.
#[derive(Debug, Clone)]
pub struct CandidateTable {
    strategy: Strategy,
    modes: &'static [CommMode],
    powers: Vec<f64>,
    weights: Vec<f64>,
    utility: Vec<f64>,
    primary: Vec<f64>,
    n_cand: usize,
    r_silent: f64,
    p_avg: f64,
    p_peak: f64,
}

#[derive(Debug, Clone)]
struct Choice {
    idx: Vec<u32>,
    power: f64,
    primary: f64,
    utility: f64,
}

impl CandidateTable {
    pub fn build(
        scn: &UplinkScenario,
        ensemble: &FadingEnsemble,
        strategy: Strategy,
        power_grid: usize,
    ) -> Result<Self> {
        scn.validate()?;
        if power_grid < 2 {
            return Err(Error::Config(format!(
                "power_grid must be >= 2, got {power_grid}"
            )));
        }
        let modes = strategy.modes();
        let powers: Vec<f64> = (0..power_grid)
            .map(|j| grid_power(j, power_grid, scn.p_peak))
            .collect();
        let n_cand = power_grid * modes.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = ensemble
            .states()
            .par_iter()
            .map(|state| {
                let mut u = Vec::with_capacity(n_cand);
                let mut r = Vec::with_capacity(n_cand);
                for &p in &powers {
                    let rp = primary_rate(p, state, scn);
                    for &m in modes {
                        u.push(utility_unchecked(m, p, state, scn));
                        r.push(rp);
                    }
                }
                (u, r)
            })
            .collect();
        let (utility, primary): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
        Ok(CandidateTable {
            strategy,
            modes,
            powers,
            weights: ensemble.weights().to_vec(),
            utility: utility.concat(),
            primary: primary.concat(),
            n_cand,
            r_silent: silent_primary_rate(scn, ensemble),
            p_avg: scn.p_avg,
            p_peak: scn.p_peak,
        })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n_states(&self) -> usize {
        self.weights.len()
    }

    pub fn n_candidates(&self) -> usize {
        self.n_cand
    }

    /// Ergodic primary rate with the secondary silent everywhere.
    pub fn silent_primary_rate(&self) -> f64 {
        self.r_silent
    }

    #[inline]
    fn power_of(&self, c: usize) -> f64 {
        self.powers[c / self.modes.len()]
    }

    fn decision(&self, c: usize) -> PolicyDecision {
        let power = self.power_of(c);
        let mode = if power == 0.0 {
            CommMode::Bit
        } else {
            self.modes[c % self.modes.len()]
        };
        PolicyDecision { mode, power }
    }

    fn row(&self, state: usize) -> std::ops::Range<usize> {
        state * self.n_cand..(state + 1) * self.n_cand
    }

    /// Per-state argmax and the dual function value at `duals`.
    fn maximize(&self, duals: DualVars, r_req: f64) -> (Choice, f64) {
        let DualVars {
            lambda_apc: lam,
            nu_primary: nu,
        } = duals;
        let picks: Vec<(u32, f64)> = (0..self.n_states())
            .into_par_iter()
            .with_min_len(STATE_CHUNK)
            .map(|i| {
                let rng = self.row(i);
                let (u, r) = (&self.utility[rng.clone()], &self.primary[rng]);
                let mut best = (0u32, f64::NEG_INFINITY);
                for c in 0..self.n_cand {
                    let v = u[c] + nu * r[c] - lam * self.power_of(c);
                    if v > best.1 {
                        best = (c as u32, v);
                    }
                }
                best
            })
            .collect();
        let lagrangian: f64 = picks.iter().zip(&self.weights).map(|((_, v), w)| w * v).sum();
        let choice = self.choice(picks.into_iter().map(|(c, _)| c).collect());
        (choice, lagrangian + lam * self.p_avg - nu * r_req)
    }

    fn choice(&self, idx: Vec<u32>) -> Choice {
        let (mut power, mut primary, mut utility) = (0.0, 0.0, 0.0);
        for (i, (&c, &w)) in idx.iter().zip(&self.weights).enumerate() {
            let c = c as usize;
            let k = i * self.n_cand + c;
            power += w * self.power_of(c);
            primary += w * self.primary[k];
            utility += w * self.utility[k];
        }
        Choice {
            idx,
            power,
            primary,
            utility,
        }
    }

    fn silent_choice(&self) -> Choice {
        self.choice(vec![0; self.n_states()])
    }

    fn feasible(&self, ch: &Choice, r_req: f64) -> bool {
        meets_constraints(ch.power, ch.primary, self.p_avg, r_req)
    }

    /// Scales that make one unit step of each multiplier comparable to the
    /// utility at stake.
    fn dual_scales(&self) -> (f64, f64) {
        let mut u_scale: f64 = (0..self.n_states())
            .map(|i| {
                let best = self.utility[self.row(i)].iter().copied().fold(0.0, f64::max);
                self.weights[i] * best
            })
            .sum();
        if u_scale.is_nan() || u_scale <= 0.0 {
            u_scale = 1.0;
        }
        let r_scale = if self.r_silent > 0.0 { self.r_silent } else { 1.0 };
        (u_scale / self.p_peak, u_scale / r_scale)
    }
}

/// Best feasible policies and tightest dual bound seen so far.
struct Tracker {
    tol: f64,
    best: Choice,
    pool: Vec<Choice>,
    pool_size: usize,
    bound: f64,
    bound_duals: DualVars,
}

impl Tracker {
    fn new(silent: Choice, tol: f64, pool_size: usize) -> Self {
        Tracker {
            tol,
            pool: vec![silent.clone()],
            best: silent,
            pool_size: pool_size.max(1),
            bound: f64::INFINITY,
            bound_duals: DualVars::default(),
        }
    }

    fn observe(&mut self, table: &CandidateTable, r_req: f64, duals: DualVars, ch: &Choice, dual_value: f64) {
        if dual_value < self.bound {
            self.bound = dual_value;
            self.bound_duals = duals;
        }
        if !table.feasible(ch, r_req) {
            return;
        }
        if ch.utility > self.best.utility {
            self.best = ch.clone();
        }
        if self.pool.iter().any(|p| p.idx == ch.idx) {
            return;
        }
        if self.pool.len() < self.pool_size {
            self.pool.push(ch.clone());
        } else if let Some((k, worst)) = self
            .pool
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.utility.total_cmp(&b.1.utility))
        {
            if ch.utility > worst.utility {
                self.pool[k] = ch.clone();
            }
        }
    }

    fn certified(&self) -> bool {
        self.bound - self.best.utility <= self.tol * self.best.utility.abs()
    }
}

/// Solves the problem for one strategy on a prebuilt table.
pub fn solve_strategy(
    table: &CandidateTable,
    scn: &UplinkScenario,
    ensemble: &FadingEnsemble,
    cfg: &SolverConfig,
) -> Result<OpportunisticResult> {
    cfg.validate()?;
    scn.validate()?;
    if table.n_states() != ensemble.len() || table.p_avg != scn.p_avg || table.p_peak != scn.p_peak {
        return Err(Error::invalid(
            "candidate table was built for a different scenario",
        ));
    }
    let r_req = scn.r_req;
    if r_req > table.r_silent {
        return Err(Error::Infeasible {
            required: r_req,
            achievable: table.r_silent,
        });
    }

    let mut tracker = Tracker::new(table.silent_choice(), cfg.tol, cfg.polish_starts);
    let mut probe = |tracker: &mut Tracker, duals: DualVars| {
        let (ch, g) = table.maximize(duals, r_req);
        tracker.observe(table, r_req, duals, &ch, g);
        ch
    };

    // Phase 1: projected subgradient.
    let (lambda_scale, nu_scale) = table.dual_scales();
    let r_norm = if table.r_silent > 0.0 { table.r_silent } else { 1.0 };
    let mut duals = DualVars::default();
    let mut iterations = 0;
    for t in 1..=cfg.max_iters {
        iterations = t;
        let ch = probe(&mut tracker, duals);
        if tracker.certified() {
            break;
        }
        let step = cfg.step0 / (t as f64).sqrt();
        duals.lambda_apc =
            (duals.lambda_apc + step * lambda_scale * (ch.power - scn.p_avg) / scn.p_avg).max(0.0);
        duals.nu_primary = (duals.nu_primary + step * nu_scale * (r_req - ch.primary) / r_norm).max(0.0);
    }

    // Phase 2: nested bisection on the multipliers.
    if !tracker.certified() {
        bisect_duals(&mut tracker, &mut probe, scn.p_avg, r_req, lambda_scale, nu_scale);
    }

    // Phase 3: local search around the best feasible iterates.
    if !tracker.certified() {
        let starts = std::mem::take(&mut tracker.pool);
        for start in starts {
            let polished = polish(table, r_req, start, cfg.polish_pair_limit);
            if polished.utility > tracker.best.utility {
                tracker.best = polished;
            }
        }
    }

    let policy: Vec<PolicyDecision> = tracker
        .best
        .idx
        .iter()
        .map(|&c| table.decision(c as usize))
        .collect();
    let (ergodic_secondary, ergodic_primary, avg_power) = super::evaluate_policy(scn, ensemble, &policy)?;
    Ok(OpportunisticResult {
        strategy: table.strategy,
        r_req,
        ergodic_secondary,
        ergodic_primary,
        avg_power,
        policy,
        duals: tracker.bound_duals,
        dual_bound: tracker.bound,
        iterations,
        converged: tracker.certified(),
    })
}

fn bisect_duals<F>(
    tracker: &mut Tracker,
    probe: &mut F,
    p_avg: f64,
    r_req: f64,
    lambda_scale: f64,
    nu_scale: f64,
) where
    F: FnMut(&mut Tracker, DualVars) -> Choice,
{
    // Smallest lambda meeting the power budget at this nu; returns the
    // primary rate there, or None once the gap is certified.
    let mut inner = |tracker: &mut Tracker, nu: f64| -> Option<f64> {
        let at = |lambda_apc| DualVars {
            lambda_apc,
            nu_primary: nu,
        };
        let ch = probe(tracker, at(0.0));
        if tracker.certified() {
            return None;
        }
        if ch.power <= p_avg {
            return Some(ch.primary);
        }
        let (mut lo, mut hi) = (0.0, lambda_scale);
        let mut hi_ch = probe(tracker, at(hi));
        let mut doublings = 0;
        while hi_ch.power > p_avg && doublings < MAX_DOUBLINGS {
            lo = hi;
            hi *= 2.0;
            hi_ch = probe(tracker, at(hi));
            doublings += 1;
        }
        for _ in 0..BISECTION_STEPS {
            if tracker.certified() {
                return None;
            }
            let mid = 0.5 * (lo + hi);
            let ch = probe(tracker, at(mid));
            if ch.power > p_avg {
                lo = mid;
            } else {
                hi = mid;
                hi_ch = ch;
            }
        }
        Some(hi_ch.primary)
    };

    let Some(r0) = inner(tracker, 0.0) else { return };
    if r0 >= r_req {
        return;
    }
    let (mut lo, mut hi) = (0.0, nu_scale);
    let mut doublings = 0;
    loop {
        let Some(r) = inner(tracker, hi) else { return };
        if r >= r_req || doublings >= MAX_DOUBLINGS {
            break;
        }
        lo = hi;
        hi *= 2.0;
        doublings += 1;
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let Some(r) = inner(tracker, mid) else { return };
        if r < r_req {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Best-improvement local search that keeps the policy exactly feasible.
fn polish(table: &CandidateTable, r_req: f64, start: Choice, pair_limit: usize) -> Choice {
    let n = table.n_states();
    let nc = table.n_cand;
    let w = &table.weights;
    let mut cur = start;
    loop {
        let idx = &cur.idx;
        let delta = |i: usize, c: usize| {
            let (k_new, k_old) = (i * nc + c, i * nc + idx[i] as usize);
            (
                w[i] * (table.utility[k_new] - table.utility[k_old]),
                w[i] * (table.power_of(c) - table.power_of(idx[i] as usize)),
                w[i] * (table.primary[k_new] - table.primary[k_old]),
            )
        };
        let admissible =
            |dp: f64, dr: f64| meets_constraints(cur.power + dp, cur.primary + dr, table.p_avg, r_req);
        let threshold = 1e-12 * cur.utility.abs().max(f64::MIN_POSITIVE);

        let mut best_gain = threshold;
        let mut best_move: Option<[(usize, usize); 2]> = None;
        for i in 0..n {
            for c in 0..nc {
                let (du, dp, dr) = delta(i, c);
                if du > best_gain && admissible(dp, dr) {
                    best_gain = du;
                    best_move = Some([(i, c), (i, c)]);
                }
            }
        }
        if best_move.is_none() && n <= pair_limit {
            for i in 0..n {
                for j in i + 1..n {
                    for c in 0..nc {
                        let (du1, dp1, dr1) = delta(i, c);
                        for d in 0..nc {
                            let (du2, dp2, dr2) = delta(j, d);
                            let du = du1 + du2;
                            if du > best_gain && admissible(dp1 + dp2, dr1 + dr2) {
                                best_gain = du;
                                best_move = Some([(i, c), (j, d)]);
                            }
                        }
                    }
                }
            }
        }
        let Some(moves) = best_move else { return cur };
        let mut next = cur.idx.clone();
        for (i, c) in moves {
            next[i] = c as u32;
        }
        let next = table.choice(next);
        // Incremental sums can disagree with the ordered re-sum at the boundary.
        if !table.feasible(&next, r_req) || next.utility <= cur.utility {
            return cur;
        }
        cur = next;
    }
}

/// Opportunistic mode switching: the secondary may use either mode per state.
pub fn solve_dual(
    scn: &UplinkScenario,
    ensemble: &FadingEnsemble,
    cfg: &SolverConfig,
) -> Result<OpportunisticResult> {
    let table = CandidateTable::build(scn, ensemble, Strategy::Opportunistic, cfg.power_grid)?;
    solve_strategy(&table, scn, ensemble, cfg)
}

/// Baseline with the secondary user pinned to one mode.
pub fn evaluate_fixed_mode(
    scn: &UplinkScenario,
    ensemble: &FadingEnsemble,
    mode: CommMode,
    cfg: &SolverConfig,
) -> Result<OpportunisticResult> {
    let table = CandidateTable::build(scn, ensemble, Strategy::pinned(mode), cfg.power_grid)?;
    solve_strategy(&table, scn, ensemble, cfg)
}

/// Dual function value `g(lambda, nu)` for `strategy` on the given grid.
pub fn dual_objective(
    scn: &UplinkScenario,
    ensemble: &FadingEnsemble,
    strategy: Strategy,
    power_grid: usize,
    duals: DualVars,
) -> Result<f64> {
    let table = CandidateTable::build(scn, ensemble, strategy, power_grid)?;
    Ok(table.maximize(duals, scn.r_req).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_fading, FadingSampler, FadingState, NoiseModel};
    use crate::opportunistic::{evaluate_policy, solve_per_state_with};
    use crate::rates::{BitEquivalence, SemanticTextModel};

    fn scenario() -> UplinkScenario {
        UplinkScenario {
            primary_power: 1.0,
            bandwidth: 1e6,
            noise: NoiseModel::new(1e-10).unwrap(),
            semantic: SemanticTextModel::default(),
            conversion: BitEquivalence::default(),
            r_req: 0.0,
            p_avg: 0.5,
            p_peak: 1.0,
        }
    }

    fn ensemble(n: usize, seed: u64) -> FadingEnsemble {
        sample_fading(
            &FadingSampler::new(1.0, 0).unwrap(),
            &FadingSampler::new(1.0, 1).unwrap(),
            n,
            seed,
        )
        .unwrap()
    }

    fn small_cfg() -> SolverConfig {
        SolverConfig {
            power_grid: 41,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn table_argmax_matches_per_state_solver() {
        let scn = scenario();
        let ens = ensemble(50, 3);
        for strategy in Strategy::ALL {
            let table = CandidateTable::build(&scn, &ens, strategy, 41).unwrap();
            for duals in [
                DualVars {
                    lambda_apc: 0.0,
                    nu_primary: 0.0,
                },
                DualVars {
                    lambda_apc: 2e5,
                    nu_primary: 0.03,
                },
                DualVars {
                    lambda_apc: 5e4,
                    nu_primary: 0.1,
                },
            ] {
                let (ch, _) = table.maximize(duals, 0.0);
                for (i, st) in ens.states().iter().enumerate() {
                    let direct = solve_per_state_with(duals, st, &scn, 41, strategy);
                    assert_eq!(table.decision(ch.idx[i] as usize), direct);
                }
            }
        }
    }

    #[test]
    fn unconstrained_corner_is_full_power() {
        let scn = UplinkScenario {
            p_avg: 1.0,
            ..scenario()
        };
        let ens = ensemble(40, 11);
        let res = solve_dual(&scn, &ens, &small_cfg()).unwrap();
        assert!(res.converged);
        assert!(res.policy.iter().all(|d| d.power == scn.p_peak));
        let best: f64 = ens.expectation(|s| {
            [CommMode::Semantic, CommMode::Bit]
                .iter()
                .map(|&m| utility_unchecked(m, scn.p_peak, s, &scn))
                .fold(0.0, f64::max)
        });
        assert!((res.ergodic_secondary - best).abs() <= 1e-12 * best);
    }

    #[test]
    fn infeasible_requirement_is_rejected() {
        let scn = scenario();
        let ens = ensemble(30, 2);
        let cap = silent_primary_rate(&scn, &ens);
        let err = solve_dual(&scn.with_r_req(cap * 1.01), &ens, &small_cfg()).unwrap_err();
        match err {
            Error::Infeasible { required, achievable } => {
                assert_eq!(achievable, cap);
                assert!(required > achievable);
            }
            other => panic!("unexpected {other}"),
        }
        // Exactly at the cap the silent policy is feasible.
        let res = solve_dual(&scn.with_r_req(cap), &ens, &small_cfg()).unwrap();
        assert!(res.ergodic_primary >= cap);
        assert!(res.policy.iter().all(|d| d.power == 0.0));
    }

    #[test]
    fn reported_values_are_policy_reevaluations() {
        let ens = ensemble(200, 5);
        let scn = scenario();
        let cap = silent_primary_rate(&scn, &ens);
        for frac in [0.0, 0.4, 0.8] {
            let s = scn.with_r_req(frac * cap);
            let res = solve_dual(&s, &ens, &small_cfg()).unwrap();
            let (u, r, p) = evaluate_policy(&s, &ens, &res.policy).unwrap();
            assert_eq!(
                (u, r, p),
                (res.ergodic_secondary, res.ergodic_primary, res.avg_power)
            );
            assert!(meets_constraints(
                res.avg_power,
                res.ergodic_primary,
                s.p_avg,
                s.r_req
            ));
            // Weak duality at the reported multipliers.
            let g = dual_objective(&s, &ens, Strategy::Opportunistic, 41, res.duals).unwrap();
            assert_eq!(g, res.dual_bound);
            assert!(g >= res.ergodic_secondary);
        }
    }

    #[test]
    fn pinned_bit_matches_when_opportunistic_never_uses_semantics() {
        // Strong secondary links: bit mode wins everywhere at any power level
        // that matters, so the two problems coincide.
        let scn = UplinkScenario {
            p_avg: 1.0,
            ..scenario()
        };
        let states = vec![
            FadingState::new(1.0, 50.0).unwrap(),
            FadingState::new(2.0, 80.0).unwrap(),
        ];
        let ens = FadingEnsemble::uniform(states).unwrap();
        let opp = solve_dual(&scn, &ens, &small_cfg()).unwrap();
        assert!(opp.policy.iter().all(|d| d.mode == CommMode::Bit));
        let bit = evaluate_fixed_mode(&scn, &ens, CommMode::Bit, &small_cfg()).unwrap();
        assert_eq!(opp.policy, bit.policy);
        assert_eq!(opp.ergodic_secondary, bit.ergodic_secondary);
    }

    #[test]
    fn semantic_only_respects_ceiling() {
        let scn = UplinkScenario {
            p_avg: 1.0,
            ..scenario()
        };
        let ens = ensemble(100, 8);
        let res = evaluate_fixed_mode(&scn, &ens, CommMode::Semantic, &small_cfg()).unwrap();
        assert!(res.ergodic_secondary <= scn.semantic.semantic_ceiling(scn.bandwidth));
        assert!(res
            .policy
            .iter()
            .all(|d| d.power == 0.0 || d.mode == CommMode::Semantic));
    }

    #[test]
    fn polish_never_breaks_feasibility() {
        let scn = scenario();
        let ens = ensemble(4, 21);
        let cap = silent_primary_rate(&scn, &ens);
        let cfg = SolverConfig {
            power_grid: 11,
            ..SolverConfig::default()
        };
        for frac in [0.1, 0.5, 0.9] {
            let s = scn.with_r_req(frac * cap);
            let res = solve_dual(&s, &ens, &cfg).unwrap();
            assert!(meets_constraints(
                res.avg_power,
                res.ergodic_primary,
                s.p_avg,
                s.r_req
            ));
            assert!(res.dual_bound >= res.ergodic_secondary);
        }
    }

    #[test]
    fn table_rejects_mismatched_scenario() {
        let scn = scenario();
        let ens = ensemble(10, 1);
        let table = CandidateTable::build(&scn, &ens, Strategy::Opportunistic, 11).unwrap();
        let other = UplinkScenario { p_avg: 0.25, ..scn };
        let cfg = SolverConfig {
            power_grid: 11,
            ..SolverConfig::default()
        };
        assert!(solve_strategy(&table, &other, &ens, &cfg).is_err());
    }
}
